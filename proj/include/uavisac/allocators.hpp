#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "uavisac/conic.hpp"
#include "uavisac/fisher.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/types.hpp"

namespace uavisac {

/// Per-UAV sensing and communication powers (watts).
struct PowerAllocation {
  Eigen::VectorXd sensing;
  Eigen::VectorXd comm;

  double total() const { return sensing.sum() + comm.sum(); }
};

struct Ellipsoid {
  double delta = 1.0;  // volume parameter of {du : du^T J_p du <= delta}
};
struct GaussianOutage {
  double p_out = 0.1;
};
struct ArbitraryMoments {
  double p_out = 0.1;
};
using RobustnessModel = std::variant<Ellipsoid, GaussianOutage, ArbitraryMoments>;

struct AllocatorConfig {
  double rate_floor = 1.0;   // R_bar, bits/s/Hz
  double total_power = 1.0;  // P_total, W
  double tolerance = 1e-7;   // stop when the objective decrease falls below this
  int max_iters = 30;
  Eigen::VectorXd initial_sensing;  // empty -> total_power / (2K) per UAV

  /// Reproduce the paper's asymmetric derivative groupings instead of the
  /// symmetric Frechet forms (trace values coincide; constraint matrices
  /// get symmetrized).
  bool paper_linearization = false;
  /// Keep the CVaR expansion point at the initial sensing power instead of
  /// rebuilding it every iteration.
  bool freeze_cvar_expansion = false;

  double solver_tolerance = 1e-9;

  void validate(int uav_count) const;
  Eigen::VectorXd initial_or_default(int uav_count) const;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;  // tr(J_p^-1) after the sensing step
  Eigen::VectorXd sensing;
  Eigen::VectorXd comm;
  std::map<std::string, double> aux;  // lambda_s | omega_k, rho | chi_k
  std::vector<Eigen::Matrix4d> cvar_m;
  std::string comm_status;
  std::string sensing_status;
};

struct IterationTrace {
  std::vector<IterationRecord> iterations;
  bool converged = false;  // tolerance reached before the iteration cap
};

struct AllocatorResult {
  PowerAllocation allocation;
  IterationTrace trace;
  FisherInfo fisher;  // at the returned sensing powers
  double crb = 0.0;
};

/// Error carrying the last feasible allocation for diagnosable runs.
class AllocatorError : public Error {
 public:
  AllocatorError(ErrorCode code, const std::string& msg,
                 std::optional<PowerAllocation> last = std::nullopt)
      : Error(code, msg), last_feasible_(std::move(last)) {}
  const std::optional<PowerAllocation>& last_feasible() const { return last_feasible_; }

 private:
  std::optional<PowerAllocation> last_feasible_;
};

/// gamma_k = lambda^2 |a_k^H w_k|^2 / (16 pi^2 N0 (2^Rbar - 1)); the rate
/// floor holds iff ||u_hat + du - p_k||^2 <= gamma_k P_c.
double gamma_coefficient(const Scenario& scenario, int k, double rate_floor);
Eigen::VectorXd gamma_coefficients(const Scenario& scenario, double rate_floor);

/// S-procedure LMI lambda_s [[J, 0],[0, -delta]] - [[I, a],[a^T, ||a||^2 - gamma_k P_c]]
/// for a = u_hat - p_k. Exactly one of (j_expr, lambda_s) may contain
/// decision variables.
conic::MatExpr ellipsoid_lmi(const Scenario& scenario, int k, const conic::LinExpr& comm_power,
                             const conic::MatExpr& j_expr, const conic::LinExpr& lambda_s,
                             double delta, double rate_floor);

/// Exact Bernstein quantities at a fixed FIM: tr(J^-1), the slack
/// omega* = sqrt(||J^-1||_F^2 + 2 ||J^-1/2 a||^2) and lambda_max(J^-1).
struct BernsteinCertificate {
  double trace_inv = 0.0;
  double omega = 0.0;
  double max_eig = 0.0;

  /// LHS of the deterministic rate constraint; feasible iff <= 0.
  double violation(double gamma_comm_power, double dist2, double p_out) const;
};
BernsteinCertificate bernstein_exact(const Mat3& j, const Vec3& u_minus_p);

/// First-order surrogates around (J0, omega0):
///   f1    = tr(J0^-2) - 2 tr(J0^-3 (J - J0))
///   Omega = J0^-1 - J0^-1 (J - J0) J0^-1      (paper grouping: J0^-2 (J - J0))
///   f2    = omega0^2 + 2 omega0 (omega - omega0)
struct ScaLinearization {
  conic::LinExpr f1;
  conic::MatExpr omega;
  conic::LinExpr f2;
};
ScaLinearization sca_linearize(const Mat3& j0, const conic::MatExpr& j_expr, double omega0,
                               const conic::LinExpr& omega, bool paper_grouping = false);

/// Exact convex emission of the Bernstein reformulation: the linear rate
/// constraint (with tr(J^-1) through `trace_epigraph`) and the Schur form
/// [[rho I, I],[I, J]] >= 0 of rho I - J^-1 >= 0. The Frobenius-norm member
/// is not affine in J and enters through the SCA overload below.
void bernstein_constraints(conic::ConicProblem& prob, const Scenario& scenario, int k,
                           const conic::LinExpr& comm_power, const conic::MatExpr& j_expr,
                           const conic::LinExpr& trace_epigraph, const conic::LinExpr& omega,
                           const conic::LinExpr& rho, double p_out, double rate_floor);

/// Iterate emission used by solve_bisca: the linear rate constraint plus the
/// linearized norm and eigenvalue members built from `lin`.
void bernstein_constraints(conic::ConicProblem& prob, const Scenario& scenario, int k,
                           const conic::LinExpr& comm_power, const conic::LinExpr& trace_epigraph,
                           const conic::LinExpr& omega, const conic::LinExpr& rho, double p_out,
                           double rate_floor, const ScaLinearization& lin);

/// Moment matrix D = [[J^-1, 0],[0, 1]] of the ambiguity set.
Eigen::Matrix4d cvar_moment_matrix(const Mat3& j);

/// CVaR reformulation for UAV k with the moment matrix fixed: M >= 0, the
/// shifted quadratic-bound LMI, and chi + tr(D M)/p_out <= 0.
void cvar_constraints(conic::ConicProblem& prob, const Scenario& scenario, int k,
                      const conic::LinExpr& comm_power, const Eigen::Matrix4d& d_matrix,
                      const conic::SymVar& m_var, const conic::LinExpr& chi, double p_out,
                      double rate_floor);

/// Sensing-step counterpart: chi and M fixed, J variable; the trace term is
/// expanded to first order in X = [[J, 0],[0, 1]] around X0 = D0^-1.
void cvar_sensing_constraint(conic::ConicProblem& prob, int k, const conic::MatExpr& j_expr,
                             const Mat3& j0, const Eigen::Matrix4d& d0,
                             const Eigen::Matrix4d& m_value, double chi_value, double p_out,
                             bool paper_grouping);

AllocatorResult solve_sao(const Scenario& scenario, const AllocatorConfig& config, double delta);
AllocatorResult solve_bisca(const Scenario& scenario, const AllocatorConfig& config, double p_out);
AllocatorResult solve_cvarao(const Scenario& scenario, const AllocatorConfig& config,
                             double p_out);
AllocatorResult solve_nonrobust(const Scenario& scenario, const AllocatorConfig& config);

/// Dispatch on the robustness model (s-ao | bi-sca | cvar-ao).
AllocatorResult solve_robust(const Scenario& scenario, const AllocatorConfig& config,
                             const RobustnessModel& model);

}  // namespace uavisac
