#include "uavisac/conic.hpp"

#include <cmath>
#include <ostream>

namespace uavisac::conic {

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [v, c] : o.coeffs) coeffs[v] += c;
  constant += o.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [v, c] : o.coeffs) coeffs[v] -= c;
  constant -= o.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& [v, c] : coeffs) c *= s;
  constant *= s;
  return *this;
}

MatExpr::MatExpr(int dim) : dim_(dim), constant_(Eigen::MatrixXd::Zero(dim, dim)) {
  if (dim < 1) raise(ErrorCode::invalid_argument, "MatExpr: dimension must be >= 1");
}

MatExpr MatExpr::constant(const Eigen::MatrixXd& m) {
  MatExpr e(static_cast<int>(m.rows()));
  e.add_constant(m);
  return e;
}

namespace {
void check_symmetric(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    raise(ErrorCode::invalid_argument, std::string(who) + ": matrix must be symmetric");
  }
}
}  // namespace

void MatExpr::add_constant(const Eigen::MatrixXd& m) {
  check_symmetric(m, "MatExpr::add_constant");
  if (m.rows() != dim_) raise(ErrorCode::invalid_argument, "MatExpr::add_constant: dim mismatch");
  constant_ += 0.5 * (m + m.transpose());
}

void MatExpr::add_term(VarId v, const Eigen::MatrixXd& coeff) {
  check_symmetric(coeff, "MatExpr::add_term");
  if (coeff.rows() != dim_) raise(ErrorCode::invalid_argument, "MatExpr::add_term: dim mismatch");
  auto it = terms_.find(v);
  if (it == terms_.end()) {
    terms_.emplace(v, 0.5 * (coeff + coeff.transpose()));
  } else {
    it->second += 0.5 * (coeff + coeff.transpose());
  }
}

void MatExpr::add_scaled(const LinExpr& s, const Eigen::MatrixXd& m) {
  check_symmetric(m, "MatExpr::add_scaled");
  if (s.constant != 0.0) add_constant(s.constant * m);
  for (const auto& [v, c] : s.coeffs) {
    if (c != 0.0) add_term(v, c * m);
  }
}

void MatExpr::add_at(int r, int c, const LinExpr& e) {
  Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(dim_, dim_);
  unit(r, c) = 1.0;
  unit(c, r) = 1.0;
  add_scaled(e, unit);
}

void MatExpr::add_principal(int r0, const MatExpr& sub) {
  if (r0 + sub.dim() > dim_) {
    raise(ErrorCode::invalid_argument, "MatExpr::add_principal: block exceeds dimension");
  }
  Eigen::MatrixXd lift = Eigen::MatrixXd::Zero(dim_, dim_);
  lift.block(r0, r0, sub.dim(), sub.dim()) = sub.constant_part();
  constant_ += lift;
  for (const auto& [v, coeff] : sub.terms()) {
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(dim_, dim_);
    big.block(r0, r0, sub.dim(), sub.dim()) = coeff;
    add_term(v, big);
  }
}

MatExpr& MatExpr::operator+=(const MatExpr& o) {
  if (o.dim_ != dim_) raise(ErrorCode::invalid_argument, "MatExpr: dim mismatch in +=");
  constant_ += o.constant_;
  for (const auto& [v, coeff] : o.terms_) add_term(v, coeff);
  return *this;
}

MatExpr& MatExpr::operator-=(const MatExpr& o) {
  if (o.dim_ != dim_) raise(ErrorCode::invalid_argument, "MatExpr: dim mismatch in -=");
  constant_ -= o.constant_;
  for (const auto& [v, coeff] : o.terms_) add_term(v, -coeff);
  return *this;
}

MatExpr& MatExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& [v, coeff] : terms_) coeff *= s;
  return *this;
}

Eigen::MatrixXd MatExpr::eval(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out = constant_;
  for (const auto& [v, coeff] : terms_) out += x(v) * coeff;
  return out;
}

VarId SymVar::at(int i, int j) const {
  if (i > j) std::swap(i, j);
  // row-major upper triangle offset
  const int offset = i * dim - i * (i - 1) / 2 + (j - i);
  return ids.at(static_cast<size_t>(offset));
}

VarId ConicProblem::add_scalar(const std::string& name) {
  names_.push_back(name);
  return static_cast<VarId>(names_.size() - 1);
}

SymVar ConicProblem::add_symmetric(const std::string& name, int dim) {
  SymVar v;
  v.dim = dim;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      v.ids.push_back(add_scalar(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]"));
    }
  }
  return v;
}

MatExpr ConicProblem::expr(const SymVar& v) const {
  MatExpr e(v.dim);
  for (int i = 0; i < v.dim; ++i) {
    for (int j = i; j < v.dim; ++j) {
      e.add_at(i, j, LinExpr::variable(v.at(i, j)));
    }
  }
  return e;
}

void ConicProblem::add_lmi(MatExpr e, const std::string& name) {
  lmis_.emplace_back(std::move(e), name);
}

void ConicProblem::add_linear_ge(const LinExpr& e, const std::string& name) {
  ineqs_.emplace_back(e, name);
}

void ConicProblem::add_linear_le(const LinExpr& e, const std::string& name) {
  LinExpr neg = e;
  neg *= -1.0;
  ineqs_.emplace_back(neg, name);
}

void ConicProblem::add_linear_eq(const LinExpr& e, const std::string& name) {
  eqs_.emplace_back(e, name);
}

LinExpr ConicProblem::trace_inverse_epigraph(const MatExpr& j_expr, const std::string& name) {
  const int d = j_expr.dim();
  const SymVar t = add_symmetric(name + ".T", d);
  MatExpr schur(2 * d);
  schur.add_principal(0, expr(t));
  schur.add_constant([&] {
    Eigen::MatrixXd offdiag = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    offdiag.block(0, d, d, d).setIdentity();
    offdiag.block(d, 0, d, d).setIdentity();
    return offdiag;
  }());
  schur.add_principal(d, j_expr);
  add_lmi(std::move(schur), name + ".schur");
  LinExpr trace;
  for (int i = 0; i < d; ++i) trace += LinExpr::variable(t.at(i, i));
  return trace;
}

void ConicProblem::set_initial_guess(VarId v, double value) { guess_[v] = value; }

void ConicProblem::dump(std::ostream& os) const {
  os << "* conic problem dump v1\n";
  os << "* minimize c^T x subject to per-block F_b(x) = F_b0 + sum_j x_j F_bj PSD\n";
  os << "* entry lines: entry <block> <var|-1 for F_b0> <row> <col> <value> (upper triangle)\n";
  os << "nvars " << num_vars() << "\n";
  for (int j = 0; j < num_vars(); ++j) os << "var " << j << " " << names_[static_cast<size_t>(j)] << "\n";
  os << "objconst " << objective_.constant << "\n";
  for (const auto& [v, c] : objective_.coeffs) os << "c " << v << " " << c << "\n";

  int block = 0;
  auto dump_mat = [&os](int b, int var, const Eigen::MatrixXd& m) {
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = r; c < m.cols(); ++c) {
        if (m(r, c) != 0.0) os << "entry " << b << " " << var << " " << r << " " << c << " " << m(r, c) << "\n";
      }
    }
  };
  for (const auto& [e, name] : lmis_) {
    os << "block " << block << " " << e.dim() << " " << name << "\n";
    dump_mat(block, -1, e.constant_part());
    for (const auto& [v, coeff] : e.terms()) dump_mat(block, v, coeff);
    ++block;
  }
  for (const auto& [e, name] : ineqs_) {
    os << "block " << block << " 1 " << name << "\n";
    if (e.constant != 0.0) os << "entry " << block << " -1 0 0 " << e.constant << "\n";
    for (const auto& [v, c] : e.coeffs) {
      if (c != 0.0) os << "entry " << block << " " << v << " 0 0 " << c << "\n";
    }
    ++block;
  }
  int eqno = 0;
  for (const auto& [e, name] : eqs_) {
    os << "eq " << eqno << " " << name << "\n";
    if (e.constant != 0.0) os << "eqentry " << eqno << " -1 " << e.constant << "\n";
    for (const auto& [v, c] : e.coeffs) {
      if (c != 0.0) os << "eqentry " << eqno << " " << v << " " << c << "\n";
    }
    ++eqno;
  }
}

double SolveReport::value(const LinExpr& e) const {
  double out = e.constant;
  for (const auto& [v, c] : e.coeffs) out += c * assignment(v);
  return out;
}

Eigen::MatrixXd SolveReport::value(const MatExpr& e) const { return e.eval(assignment); }

Eigen::MatrixXd SolveReport::value(const SymVar& v) const {
  Eigen::MatrixXd m(v.dim, v.dim);
  for (int i = 0; i < v.dim; ++i) {
    for (int j = i; j < v.dim; ++j) {
      m(i, j) = assignment(v.at(i, j));
      m(j, i) = m(i, j);
    }
  }
  return m;
}

const char* status_name(SolveReport::Status s) {
  switch (s) {
    case SolveReport::Status::optimal: return "optimal";
    case SolveReport::Status::infeasible: return "infeasible";
    case SolveReport::Status::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

}  // namespace uavisac::conic
