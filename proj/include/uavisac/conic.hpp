#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "uavisac/types.hpp"

namespace uavisac::conic {

using VarId = int;

/// Affine scalar expression sum_i coeff_i * x_i + constant.
struct LinExpr {
  std::map<VarId, double> coeffs;
  double constant = 0.0;

  LinExpr() = default;
  LinExpr(double c) : constant(c) {}  // NOLINT: implicit by design

  static LinExpr variable(VarId v) {
    LinExpr e;
    e.coeffs[v] = 1.0;
    return e;
  }

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }
};

/// Affine symmetric-matrix expression F0 + sum_j x_j Fj. All mutators keep
/// the expression symmetric.
class MatExpr {
 public:
  explicit MatExpr(int dim);
  static MatExpr constant(const Eigen::MatrixXd& m);

  int dim() const { return dim_; }
  bool is_constant() const { return terms_.empty(); }

  void add_constant(const Eigen::MatrixXd& m);
  /// Adds coeff * x_v; coeff must be symmetric.
  void add_term(VarId v, const Eigen::MatrixXd& coeff);
  /// Adds (sum a_i x_i + c) * m for symmetric m.
  void add_scaled(const LinExpr& s, const Eigen::MatrixXd& m);
  /// Adds e at entry (r, c) and mirrors it at (c, r).
  void add_at(int r, int c, const LinExpr& e);
  /// Adds `sub` as the principal block starting at (r0, r0).
  void add_principal(int r0, const MatExpr& sub);

  MatExpr& operator+=(const MatExpr& o);
  MatExpr& operator-=(const MatExpr& o);
  MatExpr& operator*=(double s);
  friend MatExpr operator+(MatExpr a, const MatExpr& b) { return a += b; }
  friend MatExpr operator-(MatExpr a, const MatExpr& b) { return a -= b; }
  friend MatExpr operator*(double s, MatExpr a) { return a *= s; }

  const Eigen::MatrixXd& constant_part() const { return constant_; }
  const std::map<VarId, Eigen::MatrixXd>& terms() const { return terms_; }

  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;

 private:
  int dim_;
  Eigen::MatrixXd constant_;
  std::map<VarId, Eigen::MatrixXd> terms_;
};

/// Handle to a symmetric matrix decision variable (upper triangle scalars).
struct SymVar {
  int dim = 0;
  std::vector<VarId> ids;  // row-major upper triangle

  VarId at(int i, int j) const;
};

/// Standard-form problem: minimize a linear functional subject to affine
/// LMI blocks required PSD, affine inequalities, and affine equalities.
/// Immutable once handed to solve().
class ConicProblem {
 public:
  VarId add_scalar(const std::string& name);
  SymVar add_symmetric(const std::string& name, int dim);
  /// The identity expression of a matrix variable.
  MatExpr expr(const SymVar& v) const;

  void minimize(const LinExpr& objective) { objective_ = objective; }
  void add_lmi(MatExpr e, const std::string& name);
  /// e >= 0
  void add_linear_ge(const LinExpr& e, const std::string& name);
  /// e <= 0
  void add_linear_le(const LinExpr& e, const std::string& name);
  /// e == 0
  void add_linear_eq(const LinExpr& e, const std::string& name);

  /// Adds a symmetric auxiliary T and the Schur-coupling LMI
  /// [[T, I], [I, J]] >= 0; returns tr(T). Minimizing the returned
  /// expression yields tr(J^-1) for J > 0.
  LinExpr trace_inverse_epigraph(const MatExpr& j_expr, const std::string& name);

  /// Optional warm hint for the feasibility phase.
  void set_initial_guess(VarId v, double value);

  int num_vars() const { return static_cast<int>(names_.size()); }
  const std::string& var_name(VarId v) const { return names_.at(static_cast<size_t>(v)); }
  const LinExpr& objective() const { return objective_; }
  const std::vector<std::pair<MatExpr, std::string>>& lmis() const { return lmis_; }
  const std::vector<std::pair<LinExpr, std::string>>& inequalities() const { return ineqs_; }
  const std::vector<std::pair<LinExpr, std::string>>& equalities() const { return eqs_; }
  const std::map<VarId, double>& initial_guess() const { return guess_; }

  /// Plain-text sparse block-triplet dump (format documented in README).
  void dump(std::ostream& os) const;

 private:
  std::vector<std::string> names_;
  LinExpr objective_;
  std::vector<std::pair<MatExpr, std::string>> lmis_;
  std::vector<std::pair<LinExpr, std::string>> ineqs_;
  std::vector<std::pair<LinExpr, std::string>> eqs_;
  std::map<VarId, double> guess_;
};

struct SolveOptions {
  /// Target on the duality gap and KKT residuals, relative to max(1, |objective|).
  double tolerance = 1e-7;
  int max_newton_steps = 4000;
  /// Path-following multiplier between centering stages.
  double path_multiplier = 20.0;
};

struct SolveReport {
  enum class Status { optimal, infeasible, numerical_failure };

  Status status = Status::numerical_failure;
  double optimum = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd assignment;
  double residual_psd = 0.0;     // max PSD violation at the returned point
  double residual_affine = 0.0;  // max linear constraint violation
  double duality_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;  // total Newton steps
  std::string message;

  bool optimal() const { return status == Status::optimal; }
  double value(const LinExpr& e) const;
  Eigen::MatrixXd value(const MatExpr& e) const;
  Eigen::MatrixXd value(const SymVar& v) const;
};

const char* status_name(SolveReport::Status s);

SolveReport solve(const ConicProblem& problem, const SolveOptions& options = {});

}  // namespace uavisac::conic
