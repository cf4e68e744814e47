#include "uavisac/allocators.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "uavisac/channel.hpp"
#include "uavisac/geometry.hpp"

namespace uavisac {

namespace {

using conic::ConicProblem;
using conic::LinExpr;
using conic::MatExpr;
using conic::SolveOptions;
using conic::SolveReport;
using conic::SymVar;
using conic::VarId;

/// Scenario-derived constants shared by every subproblem build.
struct BuildContext {
  Eigen::VectorXd gamma;
  Eigen::VectorXd fim_coeff;  // c_k per watt
  std::vector<Mat3> psi_k;
  std::vector<Vec3> offset;  // u_hat - p_k
  Eigen::VectorXd dist2;

  BuildContext(const Scenario& scenario, double rate_floor) {
    scenario.validate();
    const int k_count = scenario.uav_count();
    gamma = gamma_coefficients(scenario, rate_floor);
    fim_coeff = fim_coefficients(scenario);
    psi_k.resize(static_cast<size_t>(k_count));
    offset.resize(static_cast<size_t>(k_count));
    dist2.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
      psi_k[static_cast<size_t>(k)] =
          psi(aod(scenario.uav_positions[static_cast<size_t>(k)], scenario.ue_estimate));
      offset[static_cast<size_t>(k)] =
          scenario.ue_estimate - scenario.uav_positions[static_cast<size_t>(k)];
      dist2(k) = offset[static_cast<size_t>(k)].squaredNorm();
    }
  }

  MatExpr fim_expr(const std::vector<VarId>& sensing_vars) const {
    MatExpr j(3);
    for (size_t k = 0; k < sensing_vars.size(); ++k) {
      j.add_term(sensing_vars[k], fim_coeff(static_cast<int>(k)) * psi_k[k]);
    }
    return j;
  }
};

LinExpr quad_form(const MatExpr& m, const Vec3& a) {
  LinExpr out;
  out.constant = a.dot(m.constant_part() * a);
  for (const auto& [v, coeff] : m.terms()) {
    const double c = a.dot(coeff * a);
    if (c != 0.0) out.coeffs[v] += c;
  }
  return out;
}

Mat3 inverse_of(const Mat3& j) {
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(j);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    raise(ErrorCode::rank_deficient_geometry, "matrix inverse requested for a singular FIM");
  }
  return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Mat3 inverse_sqrt_floored(const Mat3& j) {
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(j);
  const Eigen::Vector3d lam = eig.eigenvalues().cwiseMax(1e-12);
  return eig.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

FisherInfo checked_initial_fim(const Scenario& scenario, const Eigen::VectorXd& sensing) {
  const FisherInfo info = fim(scenario, sensing);
  if (!info.crb) {
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(info.matrix);
    std::ostringstream msg;
    msg << "geometry-infeasible: the FIM at the initial sensing powers is rank deficient "
           "(eigenvalues "
        << eig.eigenvalues().transpose()
        << "); the UAV directions must span all three axes";
    raise(ErrorCode::geometry_infeasible, msg.str());
  }
  return info;
}

SolveOptions solver_options(const AllocatorConfig& config) {
  SolveOptions opt;
  opt.tolerance = config.solver_tolerance;
  return opt;
}

[[noreturn]] void rethrow_subproblem(const SolveReport& report, const char* step, int iteration,
                                     std::optional<PowerAllocation> last) {
  std::ostringstream msg;
  msg << step << " subproblem at iteration " << iteration << ": " << report.message;
  if (report.status == SolveReport::Status::infeasible) {
    throw AllocatorError(ErrorCode::budget_infeasible, msg.str(), std::move(last));
  }
  throw AllocatorError(ErrorCode::numerical_failure, msg.str(), std::move(last));
}

void validate_allocation(const PowerAllocation& alloc, double total_power) {
  if ((alloc.sensing.array() < 0.0).any() || (alloc.comm.array() < 0.0).any()) {
    raise(ErrorCode::numerical_failure, "allocator returned a negative power");
  }
  if (alloc.total() > total_power * (1.0 + 1e-9)) {
    raise(ErrorCode::numerical_failure, "allocator exceeded the total power budget");
  }
}

}  // namespace

void AllocatorConfig::validate(int uav_count) const {
  if (!(rate_floor > 0.0)) raise(ErrorCode::invalid_argument, "config: rate_floor must be > 0");
  if (!(total_power > 0.0)) raise(ErrorCode::invalid_argument, "config: total_power must be > 0");
  if (!(tolerance > 0.0)) raise(ErrorCode::invalid_argument, "config: tolerance must be > 0");
  if (max_iters < 1) raise(ErrorCode::invalid_argument, "config: max_iters must be >= 1");
  if (initial_sensing.size() != 0) {
    if (initial_sensing.size() != uav_count) {
      raise(ErrorCode::invalid_argument, "config: initial_sensing length must be K");
    }
    if ((initial_sensing.array() <= 0.0).any()) {
      raise(ErrorCode::invalid_argument, "config: initial_sensing entries must be > 0");
    }
  }
}

Eigen::VectorXd AllocatorConfig::initial_or_default(int uav_count) const {
  if (initial_sensing.size() != 0) return initial_sensing;
  return Eigen::VectorXd::Constant(uav_count, total_power / (2.0 * uav_count));
}

double gamma_coefficient(const Scenario& scenario, int k, double rate_floor) {
  if (!(rate_floor > 0.0)) raise(ErrorCode::invalid_argument, "gamma: rate_floor must be > 0");
  const ChannelEstimate est = channel_estimate(scenario);
  const double lam = scenario.wavelength;
  return lam * lam * est.gain.at(static_cast<size_t>(k)) /
         (16.0 * std::numbers::pi * std::numbers::pi * scenario.noise_psd *
          (std::exp2(rate_floor) - 1.0));
}

Eigen::VectorXd gamma_coefficients(const Scenario& scenario, double rate_floor) {
  Eigen::VectorXd out(scenario.uav_count());
  for (int k = 0; k < scenario.uav_count(); ++k) out(k) = gamma_coefficient(scenario, k, rate_floor);
  return out;
}

conic::MatExpr ellipsoid_lmi(const Scenario& scenario, int k, const conic::LinExpr& comm_power,
                             const conic::MatExpr& j_expr, const conic::LinExpr& lambda_s,
                             double delta, double rate_floor) {
  if (!(delta > 0.0)) raise(ErrorCode::invalid_argument, "ellipsoid_lmi: delta must be > 0");
  if (!j_expr.is_constant() && !lambda_s.coeffs.empty()) {
    raise(ErrorCode::invalid_argument,
          "ellipsoid_lmi: lambda_s and J_p may not both be decision variables");
  }
  const Vec3 a = scenario.ue_estimate - scenario.uav_positions.at(static_cast<size_t>(k));
  const double gamma_k = gamma_coefficient(scenario, k, rate_floor);

  MatExpr lmi(4);
  if (j_expr.is_constant()) {
    Eigen::Matrix4d a1 = Eigen::Matrix4d::Zero();
    a1.topLeftCorner<3, 3>() = j_expr.constant_part();
    a1(3, 3) = -delta;
    lmi.add_scaled(lambda_s, a1);
  } else {
    const double lam = lambda_s.constant;
    MatExpr scaled_j = j_expr;
    scaled_j *= lam;
    lmi.add_principal(0, scaled_j);
    lmi.add_at(3, 3, LinExpr(-lam * delta));
  }
  Eigen::Matrix4d a0 = Eigen::Matrix4d::Zero();
  a0.topLeftCorner<3, 3>().setIdentity();
  a0.topRightCorner<3, 1>() = a;
  a0.bottomLeftCorner<1, 3>() = a.transpose();
  a0(3, 3) = a.squaredNorm();
  lmi.add_constant(-a0);
  // -(-gamma_k P_c) in the bottom-right corner
  Eigen::Matrix4d corner = Eigen::Matrix4d::Zero();
  corner(3, 3) = gamma_k;
  lmi.add_scaled(comm_power, corner);
  return lmi;
}

double BernsteinCertificate::violation(double gamma_comm_power, double dist2,
                                       double p_out) const {
  const double eta = -std::log(p_out);
  return trace_inv + std::sqrt(2.0 * eta) * omega + eta * max_eig - gamma_comm_power + dist2;
}

BernsteinCertificate bernstein_exact(const Mat3& j, const Vec3& u_minus_p) {
  const Mat3 j_inv = inverse_of(j);
  const Mat3 j_inv_sqrt = inverse_sqrt_floored(j);
  BernsteinCertificate cert;
  cert.trace_inv = j_inv.trace();
  cert.omega = std::sqrt(j_inv.squaredNorm() + 2.0 * (j_inv_sqrt * u_minus_p).squaredNorm());
  cert.max_eig = Eigen::SelfAdjointEigenSolver<Mat3>(j_inv).eigenvalues().maxCoeff();
  return cert;
}

ScaLinearization sca_linearize(const Mat3& j0, const conic::MatExpr& j_expr, double omega0,
                               const conic::LinExpr& omega, bool paper_grouping) {
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(j0);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    raise(ErrorCode::rank_deficient_geometry, "sca_linearize: expansion point is singular");
  }
  const Mat3 j0_inv = inverse_of(j0);
  const Mat3 j0_inv2 = j0_inv * j0_inv;
  const Mat3 j0_inv3 = j0_inv2 * j0_inv;

  ScaLinearization out{LinExpr(), MatExpr(3), LinExpr()};

  // f1 = tr(J0^-2) - 2 tr(J0^-3 (J - J0)); the gradient of tr(J^-2) at J0.
  out.f1.constant = j0_inv2.trace() + 2.0 * (j0_inv3 * j0).trace();
  for (const auto& [v, coeff] : j_expr.terms()) {
    out.f1.coeffs[v] -= 2.0 * (j0_inv3 * coeff).trace();
  }
  out.f1.constant -= 2.0 * (j0_inv3 * j_expr.constant_part()).trace();

  // Omega: first-order model of J^-1 at J0.
  MatExpr delta_j = j_expr;
  delta_j.add_constant(-j0);
  Mat3 left = paper_grouping ? j0_inv2 : j0_inv;
  Mat3 right = paper_grouping ? Mat3::Identity() : j0_inv;
  out.omega.add_constant(j0_inv);
  // subtract left * (J - J0) * right, symmetrized
  out.omega.add_constant(-0.5 * (left * delta_j.constant_part() * right +
                                 (left * delta_j.constant_part() * right).transpose()));
  for (const auto& [v, coeff] : delta_j.terms()) {
    const Mat3 m = left * coeff * right;
    out.omega.add_term(v, -0.5 * (m + m.transpose()));
  }

  // f2: tangent minorant of omega^2 at omega0.
  out.f2 = LinExpr(-omega0 * omega0) + 2.0 * omega0 * omega;
  return out;
}

void bernstein_constraints(conic::ConicProblem& prob, const Scenario& scenario, int k,
                           const conic::LinExpr& comm_power, const conic::MatExpr& j_expr,
                           const conic::LinExpr& trace_epigraph, const conic::LinExpr& omega,
                           const conic::LinExpr& rho, double p_out, double rate_floor) {
  if (!(p_out > 0.0 && p_out < 1.0)) {
    raise(ErrorCode::invalid_argument, "bernstein_constraints: p_out must lie in (0,1)");
  }
  const double eta = -std::log(p_out);
  const Vec3 a = scenario.ue_estimate - scenario.uav_positions.at(static_cast<size_t>(k));
  const double gamma_k = gamma_coefficient(scenario, k, rate_floor);

  LinExpr rate = trace_epigraph + std::sqrt(2.0 * eta) * omega + eta * rho -
                 gamma_k * comm_power + LinExpr(a.squaredNorm());
  prob.add_linear_le(rate, "bernstein.rate[" + std::to_string(k) + "]");

  // rho I - J^-1 >= 0 through the Schur complement on the J block.
  MatExpr schur(6);
  for (int i = 0; i < 3; ++i) schur.add_at(i, i, rho);
  Eigen::MatrixXd offdiag = Eigen::MatrixXd::Zero(6, 6);
  offdiag.block<3, 3>(0, 3).setIdentity();
  offdiag.block<3, 3>(3, 0).setIdentity();
  schur.add_constant(offdiag);
  schur.add_principal(3, j_expr);
  prob.add_lmi(std::move(schur), "bernstein.maxeig.schur[" + std::to_string(k) + "]");
}

void bernstein_constraints(conic::ConicProblem& prob, const Scenario& scenario, int k,
                           const conic::LinExpr& comm_power, const conic::LinExpr& trace_epigraph,
                           const conic::LinExpr& omega, const conic::LinExpr& rho, double p_out,
                           double rate_floor, const ScaLinearization& lin) {
  if (!(p_out > 0.0 && p_out < 1.0)) {
    raise(ErrorCode::invalid_argument, "bernstein_constraints: p_out must lie in (0,1)");
  }
  const double eta = -std::log(p_out);
  const Vec3 a = scenario.ue_estimate - scenario.uav_positions.at(static_cast<size_t>(k));
  const double gamma_k = gamma_coefficient(scenario, k, rate_floor);

  LinExpr rate = trace_epigraph + std::sqrt(2.0 * eta) * omega + eta * rho -
                 gamma_k * comm_power + LinExpr(a.squaredNorm());
  prob.add_linear_le(rate, "bernstein.rate[" + std::to_string(k) + "]");

  LinExpr norm_member = lin.f1 + 2.0 * quad_form(lin.omega, a) - lin.f2;
  prob.add_linear_le(norm_member, "bernstein.norm.sca[" + std::to_string(k) + "]");
}

Eigen::Matrix4d cvar_moment_matrix(const Mat3& j) {
  Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
  d.topLeftCorner<3, 3>() = inverse_of(j);
  d(3, 3) = 1.0;
  return d;
}

void cvar_constraints(conic::ConicProblem& prob, const Scenario& scenario, int k,
                      const conic::LinExpr& comm_power, const Eigen::Matrix4d& d_matrix,
                      const conic::SymVar& m_var, const conic::LinExpr& chi, double p_out,
                      double rate_floor) {
  if (!(p_out > 0.0 && p_out < 1.0)) {
    raise(ErrorCode::invalid_argument, "cvar_constraints: p_out must lie in (0,1)");
  }
  const Vec3 a = scenario.ue_estimate - scenario.uav_positions.at(static_cast<size_t>(k));
  const double gamma_k = gamma_coefficient(scenario, k, rate_floor);
  const std::string tag = "[" + std::to_string(k) + "]";

  const MatExpr m_expr = prob.expr(m_var);
  prob.add_lmi(m_expr, "cvar.M.psd" + tag);

  // M - [[I, a],[a^T, ||a||^2 - gamma_k P_c - chi]] >= 0
  MatExpr shifted = m_expr;
  Eigen::Matrix4d inner = Eigen::Matrix4d::Zero();
  inner.topLeftCorner<3, 3>().setIdentity();
  inner.topRightCorner<3, 1>() = a;
  inner.bottomLeftCorner<1, 3>() = a.transpose();
  inner(3, 3) = a.squaredNorm();
  shifted.add_constant(-inner);
  Eigen::Matrix4d corner = Eigen::Matrix4d::Zero();
  corner(3, 3) = 1.0;
  shifted.add_scaled(gamma_k * comm_power + chi, corner);
  prob.add_lmi(std::move(shifted), "cvar.bound" + tag);

  // chi + tr(D M) / p_out <= 0
  LinExpr trace_term = chi;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      const double w = (i == j ? 1.0 : 2.0) * d_matrix(i, j) / p_out;
      if (w != 0.0) trace_term += w * LinExpr::variable(m_var.at(i, j));
    }
  }
  prob.add_linear_le(trace_term, "cvar.risk" + tag);
}

void cvar_sensing_constraint(conic::ConicProblem& prob, int k, const conic::MatExpr& j_expr,
                             const Mat3& j0, const Eigen::Matrix4d& d0,
                             const Eigen::Matrix4d& m_value, double chi_value, double p_out,
                             bool paper_grouping) {
  // tr(D M) ~ tr(D0 M) - tr(D0 (X - X0) D0 M) with X = [[J, 0],[0, 1]] and
  // X0 = D0^-1; only the J block of X varies.
  const Eigen::Matrix4d weight_full =
      paper_grouping ? Eigen::Matrix4d(m_value * d0 * d0) : Eigen::Matrix4d(d0 * m_value * d0);
  Mat3 weight = weight_full.topLeftCorner<3, 3>();
  weight = 0.5 * (weight + weight.transpose()).eval();

  MatExpr delta_j = j_expr;
  delta_j.add_constant(-j0);
  LinExpr lin_delta;
  lin_delta.constant = (weight * delta_j.constant_part()).trace();
  for (const auto& [v, coeff] : delta_j.terms()) {
    lin_delta.coeffs[v] += (weight * coeff).trace();
  }

  LinExpr expr = LinExpr(chi_value + (d0 * m_value).trace() / p_out) - (1.0 / p_out) * lin_delta;
  prob.add_linear_le(expr, "cvar.risk.lin[" + std::to_string(k) + "]");
}

namespace {

PowerAllocation make_allocation(const Eigen::VectorXd& sensing, const Eigen::VectorXd& comm) {
  PowerAllocation alloc;
  alloc.sensing = sensing.cwiseMax(0.0);
  alloc.comm = comm.cwiseMax(0.0);
  return alloc;
}

AllocatorResult finish(const Scenario& scenario, const AllocatorConfig& config,
                       PowerAllocation alloc, IterationTrace trace) {
  validate_allocation(alloc, config.total_power);
  AllocatorResult result;
  result.fisher = fim(scenario, alloc.sensing);
  result.crb = crb(result.fisher);
  result.allocation = std::move(alloc);
  result.trace = std::move(trace);
  return result;
}

}  // namespace

AllocatorResult solve_sao(const Scenario& scenario, const AllocatorConfig& config, double delta) {
  if (!(delta > 0.0)) raise(ErrorCode::invalid_argument, "solve_sao: delta must be > 0");
  const int k_count = scenario.uav_count();
  config.validate(k_count);
  const BuildContext ctx(scenario, config.rate_floor);

  Eigen::VectorXd sensing = config.initial_or_default(k_count);
  checked_initial_fim(scenario, sensing);

  IterationTrace trace;
  Eigen::VectorXd comm = Eigen::VectorXd::Zero(k_count);
  double prev_objective = std::numeric_limits<double>::infinity();
  std::optional<PowerAllocation> last_ok;

  for (int n = 1; n <= config.max_iters; ++n) {
    const Mat3 j_fixed = fim(scenario, sensing).matrix;

    // Communication step: shrink total comm power under the S-procedure LMIs.
    ConicProblem comm_prob;
    std::vector<VarId> pc(static_cast<size_t>(k_count));
    for (int k = 0; k < k_count; ++k) {
      pc[static_cast<size_t>(k)] = comm_prob.add_scalar("Pc[" + std::to_string(k) + "]");
    }
    const VarId lambda_s = comm_prob.add_scalar("lambda_s");
    LinExpr total_comm;
    for (int k = 0; k < k_count; ++k) {
      const LinExpr pck = LinExpr::variable(pc[static_cast<size_t>(k)]);
      total_comm += pck;
      comm_prob.add_linear_ge(pck, "Pc.nonneg[" + std::to_string(k) + "]");
      comm_prob.add_lmi(ellipsoid_lmi(scenario, k, pck, MatExpr::constant(j_fixed),
                                      LinExpr::variable(lambda_s), delta, config.rate_floor),
                        "sproc[" + std::to_string(k) + "]");
    }
    comm_prob.add_linear_ge(LinExpr::variable(lambda_s), "lambda_s.nonneg");
    comm_prob.minimize(total_comm);
    // feasible warm start: P_c at twice the nominal floor, lambda_s from a
    // geometric ladder (its scale spans orders of magnitude as delta shrinks)
    Eigen::VectorXd pc_guess(k_count);
    for (int k = 0; k < k_count; ++k) {
      pc_guess(k) = std::max(comm(k), 2.0 * ctx.dist2(k) / ctx.gamma(k));
    }
    const double lam_min_j =
        Eigen::SelfAdjointEigenSolver<Mat3>(j_fixed).eigenvalues().minCoeff();
    // Warm-start lambda_s at the 1-D balance of the joint log-det barrier
    // over the K LMIs (its scale grows like 1/delta; starting anywhere else
    // costs the solver a long multiplicative march).
    const auto neg_logdet = [&](double lam) {
      double phi = 0.0;
      for (int k = 0; k < k_count; ++k) {
        const MatExpr lmi =
            ellipsoid_lmi(scenario, k, LinExpr(pc_guess(k)), MatExpr::constant(j_fixed),
                          LinExpr(lam), delta, config.rate_floor);
        const Eigen::MatrixXd f = lmi.eval(Eigen::VectorXd::Zero(0));
        const Eigen::LLT<Eigen::MatrixXd> llt(f);
        if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
        for (int i = 0; i < f.rows(); ++i) {
          const double d = llt.matrixL()(i, i);
          if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
          phi -= 2.0 * std::log(d);
        }
      }
      return phi;
    };
    const double lam_base = lam_min_j > 0.0 ? 1.0 / lam_min_j : 1.0;
    double lam_guess = 2.0 * lam_base;
    double best_phi = std::numeric_limits<double>::infinity();
    for (double lam = 1.0001 * lam_base; lam < 1e16 * lam_base; lam *= 1.6) {
      const double phi = neg_logdet(lam);
      if (phi < best_phi) {
        best_phi = phi;
        lam_guess = lam;
      }
    }
    for (int k = 0; k < k_count; ++k) {
      comm_prob.set_initial_guess(pc[static_cast<size_t>(k)], pc_guess(k));
    }
    comm_prob.set_initial_guess(lambda_s, lam_guess);
    const SolveReport comm_report = conic::solve(comm_prob, solver_options(config));
    if (!comm_report.optimal()) rethrow_subproblem(comm_report, "communication", n, last_ok);

    Eigen::VectorXd comm_new(k_count);
    for (int k = 0; k < k_count; ++k) comm_new(k) = comm_report.assignment(pc[static_cast<size_t>(k)]);
    const double lambda_val = comm_report.assignment(lambda_s);
    if (comm_new.sum() > config.total_power * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "budget-infeasible: worst-case rate floor needs " << comm_new.sum()
          << " W of communication power but the budget is " << config.total_power << " W";
      throw AllocatorError(ErrorCode::budget_infeasible, msg.str(), last_ok);
    }

    // Sensing step: minimize tr(J^-1) with (P_c, lambda_s) frozen.
    ConicProblem sens_prob;
    std::vector<VarId> ps(static_cast<size_t>(k_count));
    for (int k = 0; k < k_count; ++k) {
      ps[static_cast<size_t>(k)] = sens_prob.add_scalar("Ps[" + std::to_string(k) + "]");
    }
    const MatExpr j_expr = ctx.fim_expr(ps);
    const LinExpr tr_t = sens_prob.trace_inverse_epigraph(j_expr, "crb");
    sens_prob.minimize(tr_t);
    sens_prob.add_lmi(j_expr, "fim.psd");
    LinExpr budget(config.total_power - comm_new.sum());
    for (int k = 0; k < k_count; ++k) {
      const LinExpr psk = LinExpr::variable(ps[static_cast<size_t>(k)]);
      budget -= psk;
      sens_prob.add_linear_ge(psk, "Ps.nonneg[" + std::to_string(k) + "]");
      sens_prob.add_lmi(ellipsoid_lmi(scenario, k, LinExpr(comm_new(k)), j_expr,
                                      LinExpr(lambda_val), delta, config.rate_floor),
                        "sproc[" + std::to_string(k) + "]");
    }
    sens_prob.add_linear_ge(budget, "power.budget");
    for (int k = 0; k < k_count; ++k) {
      sens_prob.set_initial_guess(ps[static_cast<size_t>(k)], sensing(k));
    }
    const SolveReport sens_report = conic::solve(sens_prob, solver_options(config));
    if (!sens_report.optimal()) rethrow_subproblem(sens_report, "sensing", n, last_ok);

    for (int k = 0; k < k_count; ++k) sensing(k) = sens_report.assignment(ps[static_cast<size_t>(k)]);
    comm = comm_new;
    last_ok = make_allocation(sensing, comm);

    const double objective = crb(fim(scenario, sensing));
    IterationRecord rec;
    rec.iteration = n;
    rec.objective = objective;
    rec.sensing = sensing;
    rec.comm = comm;
    rec.aux["lambda_s"] = lambda_val;
    rec.comm_status = comm_report.message;
    rec.sensing_status = sens_report.message;
    trace.iterations.push_back(std::move(rec));

    if (prev_objective - objective < config.tolerance) {
      trace.converged = true;
      break;
    }
    prev_objective = objective;
  }

  return finish(scenario, config, make_allocation(sensing, comm), std::move(trace));
}

AllocatorResult solve_bisca(const Scenario& scenario, const AllocatorConfig& config,
                            double p_out) {
  if (!(p_out > 0.0 && p_out < 1.0)) {
    raise(ErrorCode::invalid_argument, "solve_bisca: p_out must lie in (0,1)");
  }
  const int k_count = scenario.uav_count();
  config.validate(k_count);
  const BuildContext ctx(scenario, config.rate_floor);

  Eigen::VectorXd sensing = config.initial_or_default(k_count);
  Mat3 j0 = checked_initial_fim(scenario, sensing).matrix;

  Eigen::VectorXd omega0(k_count);
  for (int k = 0; k < k_count; ++k) {
    omega0(k) = bernstein_exact(j0, ctx.offset[static_cast<size_t>(k)]).omega;
  }

  IterationTrace trace;
  Eigen::VectorXd comm = Eigen::VectorXd::Zero(k_count);
  double prev_objective = std::numeric_limits<double>::infinity();
  std::optional<PowerAllocation> last_ok;

  // Iteration 0 is a warm-up: the surrogate of the convex norm member
  // under-estimates it away from the expansion point, so the first solve only
  // refines (J_0, omega_0) and is not recorded. Recorded iterates then start
  // from an expansion point consistent with the exact constraint set.
  for (int n = 0; n <= config.max_iters; ++n) {
    ConicProblem prob;
    std::vector<VarId> ps(static_cast<size_t>(k_count)), pc(static_cast<size_t>(k_count)),
        om(static_cast<size_t>(k_count));
    for (int k = 0; k < k_count; ++k) ps[static_cast<size_t>(k)] = prob.add_scalar("Ps[" + std::to_string(k) + "]");
    for (int k = 0; k < k_count; ++k) pc[static_cast<size_t>(k)] = prob.add_scalar("Pc[" + std::to_string(k) + "]");
    for (int k = 0; k < k_count; ++k) om[static_cast<size_t>(k)] = prob.add_scalar("omega[" + std::to_string(k) + "]");
    const VarId rho = prob.add_scalar("rho");

    const MatExpr j_expr = ctx.fim_expr(ps);
    const LinExpr tr_t = prob.trace_inverse_epigraph(j_expr, "crb");
    prob.minimize(tr_t);
    prob.add_lmi(j_expr, "fim.psd");

    LinExpr budget(config.total_power);
    for (int k = 0; k < k_count; ++k) {
      budget -= LinExpr::variable(ps[static_cast<size_t>(k)]);
      budget -= LinExpr::variable(pc[static_cast<size_t>(k)]);
    }
    prob.add_linear_ge(budget, "power.budget");
    for (int k = 0; k < k_count; ++k) {
      prob.add_linear_ge(LinExpr::variable(ps[static_cast<size_t>(k)]), "Ps.nonneg[" + std::to_string(k) + "]");
      prob.add_linear_ge(LinExpr::variable(pc[static_cast<size_t>(k)]), "Pc.nonneg[" + std::to_string(k) + "]");
      prob.add_linear_ge(LinExpr::variable(om[static_cast<size_t>(k)]), "omega.nonneg[" + std::to_string(k) + "]");
    }
    prob.add_linear_ge(LinExpr::variable(rho), "rho.nonneg");

    ScaLinearization shared_lin{LinExpr(), MatExpr(3), LinExpr()};  // Omega is k-independent
    for (int k = 0; k < k_count; ++k) {
      const ScaLinearization lin =
          sca_linearize(j0, j_expr, omega0(k), LinExpr::variable(om[static_cast<size_t>(k)]),
                        config.paper_linearization);
      if (k == 0) shared_lin = lin;
      bernstein_constraints(prob, scenario, k, LinExpr::variable(pc[static_cast<size_t>(k)]),
                            tr_t, LinExpr::variable(om[static_cast<size_t>(k)]),
                            LinExpr::variable(rho), p_out, config.rate_floor, lin);
    }
    // (26c): rho I - Omega(P_s) >= 0 with the linearized inverse.
    MatExpr eig_lmi(3);
    for (int i = 0; i < 3; ++i) eig_lmi.add_at(i, i, LinExpr::variable(rho));
    eig_lmi -= shared_lin.omega;
    prob.add_lmi(std::move(eig_lmi), "bernstein.maxeig.sca");

    for (int k = 0; k < k_count; ++k) {
      prob.set_initial_guess(ps[static_cast<size_t>(k)], sensing(k));
      prob.set_initial_guess(om[static_cast<size_t>(k)], omega0(k) * 1.5);
      prob.set_initial_guess(pc[static_cast<size_t>(k)],
                             std::max(comm(k), 2.0 * ctx.dist2(k) / ctx.gamma(k)));
    }
    prob.set_initial_guess(
        rho, 2.0 * Eigen::SelfAdjointEigenSolver<Mat3>(inverse_of(j0)).eigenvalues().maxCoeff());

    const SolveReport report = conic::solve(prob, solver_options(config));
    if (report.status == SolveReport::Status::infeasible) {
      std::ostringstream msg;
      msg << "SCA iterate infeasible at iteration " << n << " (linearization point P_s = ["
          << sensing.transpose() << "], omega0 = [" << omega0.transpose() << "]): "
          << report.message;
      throw AllocatorError(ErrorCode::sca_infeasible_iterate, msg.str(), last_ok);
    }
    if (!report.optimal()) rethrow_subproblem(report, "joint SCA", n, last_ok);

    for (int k = 0; k < k_count; ++k) {
      sensing(k) = report.assignment(ps[static_cast<size_t>(k)]);
      comm(k) = report.assignment(pc[static_cast<size_t>(k)]);
      omega0(k) = report.assignment(om[static_cast<size_t>(k)]);
    }
    last_ok = make_allocation(sensing, comm);
    j0 = fim(scenario, sensing).matrix;
    if (n == 0) {
      // refresh omega at the new expansion point and start recording
      for (int k = 0; k < k_count; ++k) {
        omega0(k) = bernstein_exact(j0, ctx.offset[static_cast<size_t>(k)]).omega;
      }
      continue;
    }

    const double objective = crb(fim(scenario, sensing));
    IterationRecord rec;
    rec.iteration = n;
    rec.objective = objective;
    rec.sensing = sensing;
    rec.comm = comm;
    for (int k = 0; k < k_count; ++k) rec.aux["omega[" + std::to_string(k) + "]"] = omega0(k);
    rec.aux["rho"] = report.assignment(rho);
    rec.comm_status = report.message;
    rec.sensing_status = report.message;
    trace.iterations.push_back(std::move(rec));

    if (prev_objective - objective < config.tolerance) {
      trace.converged = true;
      break;
    }
    prev_objective = objective;
  }

  return finish(scenario, config, make_allocation(sensing, comm), std::move(trace));
}

AllocatorResult solve_cvarao(const Scenario& scenario, const AllocatorConfig& config,
                             double p_out) {
  if (!(p_out > 0.0 && p_out < 1.0)) {
    raise(ErrorCode::invalid_argument, "solve_cvarao: p_out must lie in (0,1)");
  }
  const int k_count = scenario.uav_count();
  config.validate(k_count);
  const BuildContext ctx(scenario, config.rate_floor);

  Eigen::VectorXd sensing = config.initial_or_default(k_count);
  const Mat3 j_init = checked_initial_fim(scenario, sensing).matrix;
  const Eigen::Matrix4d d_frozen = cvar_moment_matrix(j_init);
  const Mat3 j_frozen = j_init;

  IterationTrace trace;
  Eigen::VectorXd comm = Eigen::VectorXd::Zero(k_count);
  double prev_objective = std::numeric_limits<double>::infinity();
  std::optional<PowerAllocation> last_ok;

  for (int n = 1; n <= config.max_iters; ++n) {
    const Mat3 j_prev = fim(scenario, sensing).matrix;
    const Eigen::Matrix4d d_matrix = cvar_moment_matrix(j_prev);

    // Communication step: min sum P_c under the worst-case CVaR constraints.
    ConicProblem comm_prob;
    std::vector<VarId> pc(static_cast<size_t>(k_count));
    std::vector<SymVar> m_vars;
    std::vector<VarId> chi(static_cast<size_t>(k_count));
    for (int k = 0; k < k_count; ++k) pc[static_cast<size_t>(k)] = comm_prob.add_scalar("Pc[" + std::to_string(k) + "]");
    for (int k = 0; k < k_count; ++k) m_vars.push_back(comm_prob.add_symmetric("M[" + std::to_string(k) + "]", 4));
    for (int k = 0; k < k_count; ++k) chi[static_cast<size_t>(k)] = comm_prob.add_scalar("chi[" + std::to_string(k) + "]");

    LinExpr total_comm;
    for (int k = 0; k < k_count; ++k) {
      const LinExpr pck = LinExpr::variable(pc[static_cast<size_t>(k)]);
      total_comm += pck;
      comm_prob.add_linear_ge(pck, "Pc.nonneg[" + std::to_string(k) + "]");
      cvar_constraints(comm_prob, scenario, k, pck, d_matrix, m_vars[static_cast<size_t>(k)],
                       LinExpr::variable(chi[static_cast<size_t>(k)]), p_out, config.rate_floor);
      comm_prob.set_initial_guess(pc[static_cast<size_t>(k)],
                                  std::max(comm(k), 2.0 * ctx.dist2(k) / ctx.gamma(k)));
    }
    comm_prob.minimize(total_comm);
    const SolveReport comm_report = conic::solve(comm_prob, solver_options(config));
    if (!comm_report.optimal()) rethrow_subproblem(comm_report, "communication", n, last_ok);

    Eigen::VectorXd comm_new(k_count);
    std::vector<Eigen::Matrix4d> m_values(static_cast<size_t>(k_count));
    Eigen::VectorXd chi_values(k_count);
    for (int k = 0; k < k_count; ++k) {
      comm_new(k) = comm_report.assignment(pc[static_cast<size_t>(k)]);
      m_values[static_cast<size_t>(k)] = comm_report.value(m_vars[static_cast<size_t>(k)]);
      chi_values(k) = comm_report.assignment(chi[static_cast<size_t>(k)]);
    }
    if (comm_new.sum() > config.total_power * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "budget-infeasible: distributionally robust rate floor needs " << comm_new.sum()
          << " W of communication power but the budget is " << config.total_power << " W";
      throw AllocatorError(ErrorCode::budget_infeasible, msg.str(), last_ok);
    }

    // Sensing step with the linearized risk constraint.
    const Mat3 j_point = config.freeze_cvar_expansion ? j_frozen : j_prev;
    const Eigen::Matrix4d d_point = config.freeze_cvar_expansion ? d_frozen : d_matrix;

    ConicProblem sens_prob;
    std::vector<VarId> ps(static_cast<size_t>(k_count));
    for (int k = 0; k < k_count; ++k) ps[static_cast<size_t>(k)] = sens_prob.add_scalar("Ps[" + std::to_string(k) + "]");
    const MatExpr j_expr = ctx.fim_expr(ps);
    const LinExpr tr_t = sens_prob.trace_inverse_epigraph(j_expr, "crb");
    sens_prob.minimize(tr_t);
    sens_prob.add_lmi(j_expr, "fim.psd");
    LinExpr budget(config.total_power - comm_new.sum());
    for (int k = 0; k < k_count; ++k) {
      budget -= LinExpr::variable(ps[static_cast<size_t>(k)]);
      sens_prob.add_linear_ge(LinExpr::variable(ps[static_cast<size_t>(k)]), "Ps.nonneg[" + std::to_string(k) + "]");
      cvar_sensing_constraint(sens_prob, k, j_expr, j_point, d_point,
                              m_values[static_cast<size_t>(k)], chi_values(k), p_out,
                              config.paper_linearization);
      sens_prob.set_initial_guess(ps[static_cast<size_t>(k)], sensing(k));
    }
    sens_prob.add_linear_ge(budget, "power.budget");
    const SolveReport sens_report = conic::solve(sens_prob, solver_options(config));
    if (!sens_report.optimal()) rethrow_subproblem(sens_report, "sensing", n, last_ok);

    for (int k = 0; k < k_count; ++k) sensing(k) = sens_report.assignment(ps[static_cast<size_t>(k)]);
    comm = comm_new;
    last_ok = make_allocation(sensing, comm);

    const double objective = crb(fim(scenario, sensing));
    IterationRecord rec;
    rec.iteration = n;
    rec.objective = objective;
    rec.sensing = sensing;
    rec.comm = comm;
    for (int k = 0; k < k_count; ++k) rec.aux["chi[" + std::to_string(k) + "]"] = chi_values(k);
    rec.cvar_m = m_values;
    rec.comm_status = comm_report.message;
    rec.sensing_status = sens_report.message;
    trace.iterations.push_back(std::move(rec));

    if (prev_objective - objective < config.tolerance) {
      trace.converged = true;
      break;
    }
    prev_objective = objective;
  }

  return finish(scenario, config, make_allocation(sensing, comm), std::move(trace));
}

AllocatorResult solve_nonrobust(const Scenario& scenario, const AllocatorConfig& config) {
  const int k_count = scenario.uav_count();
  config.validate(k_count);
  const BuildContext ctx(scenario, config.rate_floor);
  checked_initial_fim(scenario, config.initial_or_default(k_count));

  const Eigen::VectorXd comm_floor = ctx.dist2.cwiseQuotient(ctx.gamma);
  if (comm_floor.sum() >= config.total_power) {
    std::ostringstream msg;
    msg << "budget-infeasible: the rate floor alone needs " << comm_floor.sum()
        << " W of communication power but the budget is " << config.total_power << " W";
    throw AllocatorError(ErrorCode::budget_infeasible, msg.str());
  }

  ConicProblem prob;
  std::vector<VarId> ps(static_cast<size_t>(k_count)), pc(static_cast<size_t>(k_count));
  for (int k = 0; k < k_count; ++k) ps[static_cast<size_t>(k)] = prob.add_scalar("Ps[" + std::to_string(k) + "]");
  for (int k = 0; k < k_count; ++k) pc[static_cast<size_t>(k)] = prob.add_scalar("Pc[" + std::to_string(k) + "]");
  const MatExpr j_expr = ctx.fim_expr(ps);
  const LinExpr tr_t = prob.trace_inverse_epigraph(j_expr, "crb");
  prob.minimize(tr_t);
  prob.add_lmi(j_expr, "fim.psd");
  LinExpr budget(config.total_power);
  for (int k = 0; k < k_count; ++k) {
    const LinExpr psk = LinExpr::variable(ps[static_cast<size_t>(k)]);
    const LinExpr pck = LinExpr::variable(pc[static_cast<size_t>(k)]);
    budget -= psk + pck;
    prob.add_linear_ge(psk, "Ps.nonneg[" + std::to_string(k) + "]");
    prob.add_linear_ge(pck, "Pc.nonneg[" + std::to_string(k) + "]");
    // gamma_k Pc_k >= d_k^2 is the rate floor at the estimated position
    prob.add_linear_ge(ctx.gamma(k) * pck - LinExpr(ctx.dist2(k)),
                       "rate.floor[" + std::to_string(k) + "]");
    prob.set_initial_guess(ps[static_cast<size_t>(k)],
                           config.initial_or_default(k_count)(k));
    prob.set_initial_guess(pc[static_cast<size_t>(k)], 2.0 * comm_floor(k));
  }
  prob.add_linear_ge(budget, "power.budget");

  SolveOptions opt = solver_options(config);
  opt.tolerance = std::min(opt.tolerance, 1e-10);
  const SolveReport report = conic::solve(prob, opt);
  if (report.status == SolveReport::Status::infeasible) {
    throw AllocatorError(ErrorCode::budget_infeasible,
                         "budget-infeasible: " + report.message);
  }
  if (!report.optimal()) rethrow_subproblem(report, "joint", 1, std::nullopt);

  Eigen::VectorXd sensing(k_count), comm(k_count);
  for (int k = 0; k < k_count; ++k) {
    sensing(k) = report.assignment(ps[static_cast<size_t>(k)]);
    comm(k) = report.assignment(pc[static_cast<size_t>(k)]);
  }

  IterationTrace trace;
  IterationRecord rec;
  rec.iteration = 1;
  rec.objective = crb(fim(scenario, sensing));
  rec.sensing = sensing;
  rec.comm = comm;
  rec.comm_status = report.message;
  rec.sensing_status = report.message;
  trace.iterations.push_back(std::move(rec));
  trace.converged = true;

  return finish(scenario, config, make_allocation(sensing, comm), std::move(trace));
}

AllocatorResult solve_robust(const Scenario& scenario, const AllocatorConfig& config,
                             const RobustnessModel& model) {
  return std::visit(
      [&](const auto& m) -> AllocatorResult {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Ellipsoid>) {
          return solve_sao(scenario, config, m.delta);
        } else if constexpr (std::is_same_v<T, GaussianOutage>) {
          return solve_bisca(scenario, config, m.p_out);
        } else {
          return solve_cvarao(scenario, config, m.p_out);
        }
      },
      model);
}

}  // namespace uavisac
