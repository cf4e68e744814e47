#include "uavisac/channel.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "uavisac/geometry.hpp"

namespace uavisac {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

double checked_distance(const Scenario& s, int k, const Vec3& lse, const char* who) {
  const Vec3 p = s.uav_positions.at(static_cast<size_t>(k));
  const double d = (s.ue_estimate + lse - p).norm();
  if (d == 0.0) {
    std::ostringstream msg;
    msg << who << ": perturbed UE position coincides with UAV " << k;
    raise(ErrorCode::invalid_geometry, msg.str());
  }
  return d;
}

}  // namespace

ChannelEstimate channel_estimate(const Scenario& scenario) {
  const int k_count = scenario.uav_count();
  ChannelEstimate est;
  est.h.resize(static_cast<size_t>(k_count));
  est.distance.resize(static_cast<size_t>(k_count));
  est.gain.resize(static_cast<size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    const Vec3 p = scenario.uav_positions[static_cast<size_t>(k)];
    const double d = (scenario.ue_estimate - p).norm();
    if (d == 0.0) raise(ErrorCode::invalid_geometry, "channel_estimate: UE estimate on UAV");
    const Aod angles = aod(p, scenario.ue_estimate);
    const Eigen::VectorXcd a =
        array_response(scenario.antenna_offsets[static_cast<size_t>(k)], angles,
                       scenario.wavelength);
    const std::complex<double> rho =
        std::polar(scenario.wavelength / (kFourPi * d), scenario.phase_shifts[static_cast<size_t>(k)]);
    est.h[static_cast<size_t>(k)] = rho * a;
    est.distance[static_cast<size_t>(k)] = d;
    const std::complex<double> aw = a.adjoint() * scenario.beamformers[static_cast<size_t>(k)];
    est.gain[static_cast<size_t>(k)] = std::norm(aw);
  }
  return est;
}

Eigen::VectorXcd channel_error(const Scenario& scenario, int k, const Vec3& lse) {
  const Vec3 p = scenario.uav_positions.at(static_cast<size_t>(k));
  const double d_est = (scenario.ue_estimate - p).norm();
  const double d_true = checked_distance(scenario, k, lse, "channel_error");
  const Aod angles = aod(p, scenario.ue_estimate);
  const Eigen::VectorXcd a = array_response(scenario.antenna_offsets[static_cast<size_t>(k)],
                                            angles, scenario.wavelength);
  const std::complex<double> factor =
      std::polar(scenario.wavelength / kFourPi, scenario.phase_shifts[static_cast<size_t>(k)]) *
      (1.0 / d_true - 1.0 / d_est);
  return factor * a;
}

double rate(const Scenario& scenario, int k, double comm_power, const Vec3& lse) {
  if (comm_power < 0.0) raise(ErrorCode::invalid_argument, "rate: negative power");
  const double d_true = checked_distance(scenario, k, lse, "rate");
  const Aod angles = aod(scenario.uav_positions.at(static_cast<size_t>(k)), scenario.ue_estimate);
  const Eigen::VectorXcd a = array_response(scenario.antenna_offsets[static_cast<size_t>(k)],
                                            angles, scenario.wavelength);
  const std::complex<double> aw = a.adjoint() * scenario.beamformers[static_cast<size_t>(k)];
  const double gain = std::norm(aw);
  const double snr = comm_power * scenario.wavelength * scenario.wavelength * gain /
                     (kFourPi * kFourPi * scenario.noise_psd * d_true * d_true);
  return std::log2(1.0 + snr);
}

double rate_via_channel(const Scenario& scenario, int k, double comm_power, const Vec3& lse) {
  if (comm_power < 0.0) raise(ErrorCode::invalid_argument, "rate_via_channel: negative power");
  const ChannelEstimate est = channel_estimate(scenario);
  const Eigen::VectorXcd h_true =
      est.h.at(static_cast<size_t>(k)) + channel_error(scenario, k, lse);
  const std::complex<double> hw =
      h_true.adjoint() * scenario.beamformers.at(static_cast<size_t>(k));
  return std::log2(1.0 + comm_power * std::norm(hw) / scenario.noise_psd);
}

}  // namespace uavisac
