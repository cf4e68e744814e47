#include "uavisac/fisher.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "uavisac/channel.hpp"

namespace uavisac {

Mat3 psi(const Aod& angles) {
  const double se = std::sin(angles.elevation);
  const double ce = std::cos(angles.elevation);
  const double sa = std::sin(angles.azimuth);
  const double ca = std::cos(angles.azimuth);
  const double sin2el = std::sin(2.0 * angles.elevation);
  const double sin2az = std::sin(2.0 * angles.azimuth);
  Mat3 m;
  m(0, 0) = (se * ca) * (se * ca);
  m(0, 1) = 0.5 * se * se * sin2az;
  m(0, 2) = 0.5 * sin2el * ca;
  m(1, 0) = m(0, 1);
  m(1, 1) = (se * sa) * (se * sa);
  m(1, 2) = 0.5 * sin2el * sa;
  m(2, 0) = m(0, 2);
  m(2, 1) = m(1, 2);
  m(2, 2) = ce * ce;
  return m;
}

SensingGain sensing_gain(const Scenario& scenario, const Eigen::VectorXd& sensing_power) {
  const int k_count = scenario.uav_count();
  if (sensing_power.size() != k_count) {
    raise(ErrorCode::invalid_argument, "sensing_gain: power vector length != K");
  }
  if ((sensing_power.array() < 0.0).any()) {
    raise(ErrorCode::invalid_argument, "sensing_gain: sensing powers must be nonnegative");
  }
  const ChannelEstimate est = channel_estimate(scenario);
  const double beta = scenario.effective_bandwidth;
  const double prefactor = 8.0 * std::numbers::pi * std::numbers::pi * beta * beta /
                           (scenario.lightspeed * scenario.lightspeed * scenario.noise_psd);
  SensingGain gain;
  gain.coeff.resize(k_count);
  gain.alpha.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    const std::complex<double> alpha =
        est.h[static_cast<size_t>(k)].adjoint() * scenario.beamformers[static_cast<size_t>(k)];
    gain.alpha(k) = alpha;
    gain.coeff(k) = prefactor * sensing_power(k) * std::norm(alpha);
  }
  return gain;
}

Eigen::VectorXd fim_coefficients(const Scenario& scenario) {
  return sensing_gain(scenario, Eigen::VectorXd::Ones(scenario.uav_count())).coeff;
}

FisherInfo fim(const Scenario& scenario, const Eigen::VectorXd& sensing_power) {
  const SensingGain gain = sensing_gain(scenario, sensing_power);
  Mat3 j = Mat3::Zero();
  for (int k = 0; k < scenario.uav_count(); ++k) {
    const Aod angles = aod(scenario.uav_positions[static_cast<size_t>(k)], scenario.ue_estimate);
    j += gain.coeff(k) * psi(angles);
  }
  FisherInfo info;
  info.matrix = 0.5 * (j + j.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(info.matrix);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmax > 0.0 && lmin > kFimRcondFloor * lmax) {
    info.crb = eig.eigenvalues().cwiseInverse().sum();
  }
  return info;
}

Mat3 fim_appendix_oracle(const Scenario& scenario, const Eigen::VectorXd& sensing_power) {
  const int k_count = scenario.uav_count();
  const SensingGain gain = sensing_gain(scenario, sensing_power);

  // Channel-parameter FIM: block diagonal over links, each block mixing the
  // delay with the real and imaginary parts of the link gain.
  const int n_eta = 3 * k_count;
  Eigen::MatrixXd j_eta = Eigen::MatrixXd::Zero(n_eta, n_eta);
  const double beta = scenario.effective_bandwidth;
  for (int k = 0; k < k_count; ++k) {
    const double tau_info = 8.0 * std::numbers::pi * std::numbers::pi * sensing_power(k) *
                            std::norm(gain.alpha(k)) * beta * beta / scenario.noise_psd;
    Eigen::Matrix3d phi = Eigen::Matrix3d::Zero();
    phi(0, 0) = tau_info;
    phi(1, 1) = 2.0 / scenario.noise_psd;
    phi(2, 2) = 2.0 / scenario.noise_psd;
    j_eta.block<3, 3>(3 * k, 3 * k) = phi;
  }

  // Transform to location parameters: the delay of link k depends on the UE
  // position through d tau_k / d u = (u - p_k) / (c ||u - p_k||).
  const int n_loc = 3 + 2 * k_count;
  Eigen::MatrixXd upsilon = Eigen::MatrixXd::Zero(n_loc, n_eta);
  for (int k = 0; k < k_count; ++k) {
    const Vec3 diff = scenario.ue_estimate - scenario.uav_positions[static_cast<size_t>(k)];
    const Vec3 dtau_du = diff / (scenario.lightspeed * diff.norm());
    Eigen::Matrix3d u_k = Eigen::Matrix3d::Zero();
    u_k.col(0) = dtau_du;
    upsilon.block<3, 3>(0, 3 * k) = u_k;
    Eigen::Matrix<double, 2, 3> t_k;
    t_k << 0, 1, 0, 0, 0, 1;
    upsilon.block<2, 3>(3 + 2 * k, 3 * k) = t_k;
  }

  const Eigen::MatrixXd j_loc = upsilon * j_eta * upsilon.transpose();

  // Schur complement of the gain block leaves the location FIM.
  const Eigen::MatrixXd a = j_loc.topLeftCorner(3, 3);
  const Eigen::MatrixXd b = j_loc.topRightCorner(3, n_loc - 3);
  const Eigen::MatrixXd d = j_loc.bottomRightCorner(n_loc - 3, n_loc - 3);
  const Eigen::MatrixXd schur = a - b * d.ldlt().solve(b.transpose());
  return 0.5 * (schur + schur.transpose());
}

double crb(const FisherInfo& info) {
  if (!info.crb) {
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(info.matrix);
    std::ostringstream msg;
    msg << "crb: FIM is rank deficient or ill conditioned (eigenvalues "
        << eig.eigenvalues().transpose() << "; deficient direction "
        << eig.eigenvectors().col(0).transpose()
        << "); UAV geometry does not resolve that axis";
    raise(ErrorCode::rank_deficient_geometry, msg.str());
  }
  return *info.crb;
}

}  // namespace uavisac
