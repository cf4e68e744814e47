#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <vector>

#include "uavisac/conic.hpp"

// Log-barrier path-following solver for small dense SDPs:
//   minimize c^T x  s.t.  F_b(x) = F_b0 + sum_j x_j F_bj  PSD  per block.
// Linear inequalities ride along as 1x1 blocks and equalities are
// eliminated up front through a nullspace parametrization. A phase-I
// problem (minimize the uniform slack s with F_b(x) + s I PSD) either
// produces a strictly feasible start or certifies that none exists.
// Feasibility is interpreted strictly: blocks must admit an interior point.

namespace uavisac::conic {

namespace {

struct Block {
  int dim = 0;
  Eigen::MatrixXd f0;
  std::vector<int> vars;                 // local -> global variable index
  std::vector<Eigen::MatrixXd> coeffs;   // aligned with vars
};

struct ScaledProblem {
  int nvars = 0;
  std::vector<Block> blocks;
  Eigen::VectorXd c;        // normalized objective
  double c_scale = 1.0;     // descale factor for objective values
  double obj_offset = 0.0;  // constant part of the original objective
  // x_original = x0 + nullspace * (var_scale .* y)
  Eigen::VectorXd x0;
  Eigen::MatrixXd nullspace;
  Eigen::VectorXd var_scale;
  Eigen::VectorXd y_guess;
  std::vector<int> pinned;  // reduced variables fixed at zero (appear nowhere)
};

constexpr double kCenterTol = 1e-9;       // Newton decrement^2 target
constexpr double kLooseCenterTol = 1e-4;  // decrement^2 considered centered when progress stalls
constexpr double kPhase1Box = 1e12;     // search box for the feasibility phase
constexpr double kPhase1Accept = 1e-4;  // early-accept slack margin

double sym_min_eig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// Barrier state shared by both phases. Phase I appends the slack variable s
// as the last coordinate and adds box terms; phase II works on y alone.
class Barrier {
 public:
  Barrier(const ScaledProblem& p, bool phase1) : p_(p), phase1_(phase1) {}

  int dim() const { return p_.nvars + (phase1_ ? 1 : 0); }

  double barrier_count() const {
    double nu = 0;
    for (const auto& b : p_.blocks) nu += b.dim;
    if (phase1_) nu += 2.0 * p_.nvars + 1.0;
    return nu;
  }

  // Returns false when the point is outside the barrier domain.
  bool eval(const Eigen::VectorXd& z, double* value, Eigen::VectorXd* grad,
            Eigen::MatrixXd* hess) const {
    const int n = p_.nvars;
    const double s = phase1_ ? z(n) : 0.0;
    if (phase1_ && s <= -1.0) return false;
    double val = 0.0;
    if (grad) grad->setZero(dim());
    if (hess) hess->setZero(dim(), dim());

    for (const auto& b : p_.blocks) {
      Eigen::MatrixXd f = b.f0;
      for (size_t t = 0; t < b.vars.size(); ++t) f += z(b.vars[t]) * b.coeffs[t];
      if (phase1_) f.diagonal().array() += s;
      Eigen::LLT<Eigen::MatrixXd> llt(f);
      if (llt.info() != Eigen::Success) return false;
      double logdet = 0.0;
      for (int i = 0; i < b.dim; ++i) {
        const double d = llt.matrixL()(i, i);
        if (!(d > 0.0)) return false;
        logdet += std::log(d);
      }
      val -= 2.0 * logdet;
      if (!grad) continue;

      // whitened coefficients L^-1 F_j L^-T: same traces as F^-1 F_j but the
      // congruence keeps the Newton data well conditioned near the boundary
      const auto& lmat = llt.matrixL();
      const size_t nt = b.vars.size();
      std::vector<Eigen::MatrixXd> w(nt + (phase1_ ? 1 : 0));
      for (size_t t = 0; t < nt; ++t) {
        Eigen::MatrixXd half = lmat.solve(b.coeffs[t]);
        w[t] = lmat.solve(half.transpose()).transpose();
      }
      if (phase1_) {
        Eigen::MatrixXd half = lmat.solve(Eigen::MatrixXd::Identity(b.dim, b.dim));
        w[nt] = lmat.solve(half.transpose()).transpose();
      }
      auto local_index = [&](size_t t) -> int {
        return t < nt ? b.vars[t] : n;
      };
      for (size_t t = 0; t < w.size(); ++t) {
        (*grad)(local_index(t)) -= w[t].trace();
      }
      if (hess) {
        for (size_t a = 0; a < w.size(); ++a) {
          for (size_t bb = a; bb < w.size(); ++bb) {
            const double h = (w[a].array() * w[bb].array()).sum();
            (*hess)(local_index(a), local_index(bb)) += h;
            if (local_index(a) != local_index(bb)) (*hess)(local_index(bb), local_index(a)) += h;
          }
        }
      }
    }

    if (phase1_) {
      for (int j = 0; j < n; ++j) {
        const double lo = kPhase1Box + z(j);
        const double hi = kPhase1Box - z(j);
        if (!(lo > 0.0) || !(hi > 0.0)) return false;
        val -= std::log(lo) + std::log(hi);
        if (grad) (*grad)(j) += 1.0 / hi - 1.0 / lo;
        if (hess) (*hess)(j, j) += 1.0 / (hi * hi) + 1.0 / (lo * lo);
      }
      const double smargin = 1.0 + s;
      val -= std::log(smargin);
      if (grad) (*grad)(n) -= 1.0 / smargin;
      if (hess) (*hess)(n, n) += 1.0 / (smargin * smargin);
    }
    *value = val;
    return true;
  }

 private:
  const ScaledProblem& p_;
  bool phase1_;
};

struct CenterResult {
  bool ok = false;
  bool early_stop = false;
  std::string message;
};

// Damped Newton minimization of t * obj^T z + barrier(z). `stop` (optional)
// is polled after every accepted step; phase I uses it to bail out as soon
// as a strictly feasible point appears.
CenterResult center(const Barrier& barrier, const Eigen::VectorXd& obj, double t,
                    Eigen::VectorXd& z, int* newton_steps, int max_total_steps,
                    const std::function<bool(const Eigen::VectorXd&)>& stop = {},
                    int max_center_steps = 120) {
  CenterResult res;
  if (stop && stop(z)) {
    res.ok = true;
    res.early_stop = true;
    return res;
  }
  double last_decrement2 = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_center_steps; ++it) {
    if (*newton_steps >= max_total_steps) {
      res.message = "newton step budget exhausted";
      return res;
    }
    double fval;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    if (!barrier.eval(z, &fval, &grad, &hess)) {
      res.message = "iterate left the barrier domain";
      return res;
    }
    Eigen::VectorXd g = t * obj + grad;
    // tiny per-entry ridge keeps the factorization honest on flat directions
    // without drowning the small-curvature ones (spreads reach ~1e15)
    hess.diagonal().array() += 1e-13 * (1.0 + hess.diagonal().array().abs());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success) {
      res.message = "hessian factorization failed";
      return res;
    }
    Eigen::VectorXd step = ldlt.solve(-g);
    const double decrement2 = -g.dot(step);
    if (std::getenv("UAVISAC_SOLVER_DEBUG")) {
      int arg = 0;
      z.cwiseAbs().maxCoeff(&arg);
      fprintf(stderr, "[center t=%.3g it=%d] f=%.8g dec2=%.3g zmax=|z[%d]|=%.4g\n", t, it, fval,
              decrement2, arg, z(arg));
    }
    if (!(decrement2 == decrement2)) {
      res.message = "newton decrement is NaN";
      return res;
    }
    if (decrement2 <= kCenterTol) {
      res.ok = true;
      return res;
    }
    ++(*newton_steps);
    // the objective part of the merit change is evaluated analytically:
    // forming t*obj^T z directly cancels catastrophically at large t
    const double dir_obj = obj.dot(step);
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd trial = z + alpha * step;
      double tval;
      if (barrier.eval(trial, &tval, nullptr, nullptr)) {
        const double delta_f = t * alpha * dir_obj + (tval - fval);
        if (delta_f <= -0.25 * alpha * decrement2) {
          z = trial;
          moved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!moved) {
      if (decrement2 <= kLooseCenterTol) {
        res.ok = true;  // numerically centered: float precision blocks further progress
        return res;
      }
      res.message = "line search stalled";
      return res;
    }
    last_decrement2 = decrement2;
    if (stop && stop(z)) {
      res.ok = true;
      res.early_stop = true;
      return res;
    }
    if (t * obj.dot(z) < -1e60) {
      res.message = "objective appears unbounded below";
      return res;
    }
  }
  if (last_decrement2 <= kLooseCenterTol) {
    res.ok = true;
    return res;
  }
  res.message = "centering failed to converge";
  return res;
}

// Equality elimination + scaling. Throws on malformed input; returns false
// (with message) for inconsistent equalities.
bool build_scaled(const ConicProblem& prob, ScaledProblem& out, std::string& message) {
  const int n_full = prob.num_vars();

  Eigen::VectorXd c_full = Eigen::VectorXd::Zero(n_full);
  for (const auto& [v, coef] : prob.objective().coeffs) c_full(v) = coef;
  out.obj_offset = prob.objective().constant;

  // nullspace parametrization of the equalities
  const int n_eq = static_cast<int>(prob.equalities().size());
  if (n_eq > 0) {
    Eigen::MatrixXd e(n_eq, n_full);
    Eigen::VectorXd f(n_eq);
    e.setZero();
    for (int i = 0; i < n_eq; ++i) {
      const LinExpr& expr = prob.equalities()[static_cast<size_t>(i)].first;
      for (const auto& [v, coef] : expr.coeffs) e(i, v) = coef;
      f(i) = -expr.constant;  // expr = a^T x + b == 0  ->  a^T x = -b
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(e);
    lu.setThreshold(1e-12);
    out.x0 = lu.solve(f);
    if ((e * out.x0 - f).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + f.cwiseAbs().maxCoeff())) {
      message = "equality constraints are inconsistent";
      return false;
    }
    out.nullspace = lu.kernel();
  } else {
    out.x0 = Eigen::VectorXd::Zero(n_full);
    out.nullspace = Eigen::MatrixXd::Identity(n_full, n_full);
  }
  const int n_red = static_cast<int>(out.nullspace.cols());
  out.nvars = n_red;

  // reduced objective
  Eigen::VectorXd c_red = out.nullspace.transpose() * c_full;
  out.obj_offset += c_full.dot(out.x0);

  // collect blocks in the reduced variables
  auto reduce = [&](const Eigen::MatrixXd& f0_full,
                    const std::vector<std::pair<int, Eigen::MatrixXd>>& terms_full, int dim) {
    Block b;
    b.dim = dim;
    b.f0 = f0_full;
    std::vector<Eigen::MatrixXd> dense(static_cast<size_t>(n_red));
    std::vector<bool> used(static_cast<size_t>(n_red), false);
    for (const auto& [v, coeff] : terms_full) {
      b.f0 += out.x0(v) * coeff;
      for (int j = 0; j < n_red; ++j) {
        const double w = out.nullspace(v, j);
        if (w == 0.0) continue;
        if (!used[static_cast<size_t>(j)]) {
          dense[static_cast<size_t>(j)] = Eigen::MatrixXd::Zero(dim, dim);
          used[static_cast<size_t>(j)] = true;
        }
        dense[static_cast<size_t>(j)] += w * coeff;
      }
    }
    for (int j = 0; j < n_red; ++j) {
      if (used[static_cast<size_t>(j)] &&
          dense[static_cast<size_t>(j)].cwiseAbs().maxCoeff() > 0.0) {
        b.vars.push_back(j);
        b.coeffs.push_back(dense[static_cast<size_t>(j)]);
      }
    }
    out.blocks.push_back(std::move(b));
  };

  for (const auto& [expr, name] : prob.lmis()) {
    std::vector<std::pair<int, Eigen::MatrixXd>> terms(expr.terms().begin(), expr.terms().end());
    reduce(expr.constant_part(), terms, expr.dim());
  }
  for (const auto& [expr, name] : prob.inequalities()) {
    Eigen::MatrixXd f0(1, 1);
    f0(0, 0) = expr.constant;
    std::vector<std::pair<int, Eigen::MatrixXd>> terms;
    for (const auto& [v, coef] : expr.coeffs) {
      Eigen::MatrixXd m(1, 1);
      m(0, 0) = coef;
      terms.emplace_back(v, m);
    }
    reduce(f0, terms, 1);
  }

  // block equilibration (symmetric diagonal scaling, two Ruiz passes)
  for (auto& b : out.blocks) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(b.dim);
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::VectorXd rownorm = Eigen::VectorXd::Zero(b.dim);
      auto absorb = [&](const Eigen::MatrixXd& m) {
        for (int r = 0; r < b.dim; ++r) {
          rownorm(r) = std::max(rownorm(r), m.row(r).cwiseAbs().maxCoeff());
        }
      };
      absorb(b.f0);
      for (const auto& m : b.coeffs) absorb(m);
      for (int r = 0; r < b.dim; ++r) {
        if (rownorm(r) > 0.0) d(r) /= std::sqrt(rownorm(r));
      }
      const Eigen::MatrixXd ds = d.asDiagonal();
      Eigen::VectorXd dd = d;
      b.f0 = (dd.asDiagonal() * b.f0 * dd.asDiagonal()).eval();
      for (auto& m : b.coeffs) m = (dd.asDiagonal() * m * dd.asDiagonal()).eval();
      d.setOnes();
    }
  }

  // variable scaling to O(1) coefficients
  out.var_scale = Eigen::VectorXd::Ones(n_red);
  Eigen::VectorXd maxcoef = Eigen::VectorXd::Zero(n_red);
  for (const auto& b : out.blocks) {
    for (size_t t = 0; t < b.vars.size(); ++t) {
      maxcoef(b.vars[t]) =
          std::max(maxcoef(b.vars[t]), b.coeffs[t].cwiseAbs().maxCoeff());
    }
  }
  for (int j = 0; j < n_red; ++j) {
    if (maxcoef(j) > 0.0) {
      out.var_scale(j) = 1.0 / maxcoef(j);
    } else if (c_red(j) != 0.0) {
      message = "objective is unbounded: variable " + std::to_string(j) +
                " appears in no constraint";
      return false;
    } else {
      out.pinned.push_back(j);
    }
  }
  for (auto& b : out.blocks) {
    for (size_t t = 0; t < b.vars.size(); ++t) b.coeffs[t] *= out.var_scale(b.vars[t]);
  }
  out.c = c_red.cwiseProduct(out.var_scale);
  out.c_scale = out.c.cwiseAbs().maxCoeff();
  if (out.c_scale > 0.0) {
    out.c /= out.c_scale;
  } else {
    out.c_scale = 1.0;
  }

  // initial guess mapped into the scaled reduced coordinates
  Eigen::VectorXd xg = Eigen::VectorXd::Zero(n_full);
  bool has_guess = false;
  for (const auto& [v, val] : prob.initial_guess()) {
    xg(v) = val;
    has_guess = true;
  }
  out.y_guess = Eigen::VectorXd::Zero(n_red);
  if (has_guess) {
    const Eigen::VectorXd zg =
        out.nullspace.colPivHouseholderQr().solve(xg - out.x0);
    out.y_guess = zg.cwiseQuotient(out.var_scale);
    for (int j = 0; j < n_red; ++j) {
      if (!std::isfinite(out.y_guess(j)) || std::abs(out.y_guess(j)) > 0.5 * kPhase1Box) {
        out.y_guess(j) = 0.0;
      }
    }
  }
  for (int j : out.pinned) out.y_guess(j) = 0.0;
  return true;
}

}  // namespace

SolveReport solve(const ConicProblem& prob, const SolveOptions& options) {
  SolveReport report;
  report.assignment = Eigen::VectorXd::Zero(prob.num_vars());

  ScaledProblem sp;
  std::string build_msg;
  try {
    if (!build_scaled(prob, sp, build_msg)) {
      report.status = build_msg.find("inconsistent") != std::string::npos
                          ? SolveReport::Status::infeasible
                          : SolveReport::Status::numerical_failure;
      report.message = build_msg;
      return report;
    }
  } catch (const std::exception& ex) {
    report.status = SolveReport::Status::numerical_failure;
    report.message = std::string("problem preprocessing failed: ") + ex.what();
    return report;
  }

  int newton_steps = 0;
  Eigen::VectorXd y = sp.y_guess;

  auto finalize = [&](SolveReport::Status status, const std::string& msg) {
    report.status = status;
    report.message = msg;
    report.iterations = newton_steps;
    const Eigen::VectorXd x = sp.x0 + sp.nullspace * y.cwiseProduct(sp.var_scale).eval();
    report.assignment = x;
    report.optimum = report.value(prob.objective());
    report.residual_psd = 0.0;
    report.residual_affine = 0.0;
    for (const auto& [expr, name] : prob.lmis()) {
      report.residual_psd =
          std::max(report.residual_psd, std::max(0.0, -sym_min_eig(expr.eval(x))));
    }
    for (const auto& [expr, name] : prob.inequalities()) {
      double v = expr.constant;
      for (const auto& [vv, cc] : expr.coeffs) v += cc * x(vv);
      report.residual_affine = std::max(report.residual_affine, std::max(0.0, -v));
    }
    for (const auto& [expr, name] : prob.equalities()) {
      double v = expr.constant;
      for (const auto& [vv, cc] : expr.coeffs) v += cc * x(vv);
      report.residual_affine = std::max(report.residual_affine, std::abs(v));
    }
    return report;
  };

  if (sp.blocks.empty()) {
    if (sp.c.cwiseAbs().maxCoeff() > 0.0) {
      return finalize(SolveReport::Status::numerical_failure,
                      "objective is unbounded: no constraints");
    }
    report.duality_gap = 0.0;
    return finalize(SolveReport::Status::optimal, "no constraints");
  }

  // ---- Phase I: minimize slack s with F_b(y) + s I > 0
  {
    Barrier barrier(sp, /*phase1=*/true);
    Eigen::VectorXd z(sp.nvars + 1);
    z.head(sp.nvars) = y;
    double worst = 0.0;
    for (const auto& b : sp.blocks) {
      Eigen::MatrixXd f = b.f0;
      for (size_t t = 0; t < b.vars.size(); ++t) f += z(b.vars[t]) * b.coeffs[t];
      worst = std::min(worst, sym_min_eig(f));
    }
    z(sp.nvars) = -worst + 0.01;
    Eigen::VectorXd obj = Eigen::VectorXd::Zero(sp.nvars + 1);
    obj(sp.nvars) = 1.0;

    const double nu = barrier.barrier_count();
    const auto feasible_enough = [&](const Eigen::VectorXd& point) {
      return point(sp.nvars) <= -kPhase1Accept;
    };
    // Start with real pressure on the slack; exact centering is not needed
    // here, so a stage that exhausts its step budget just bumps t.
    double t = std::max(8.0, nu / 4.0);
    bool accepted = false;
    std::string fail_msg;
    for (int stage = 0; stage < 60; ++stage) {
      const CenterResult cr = center(barrier, obj, t, z, &newton_steps,
                                     options.max_newton_steps, feasible_enough, 40);
      if (cr.ok && (cr.early_stop || z(sp.nvars) <= -kPhase1Accept)) {
        accepted = true;
        break;
      }
      if (!cr.ok) {
        // a strictly feasible iterate is all phase I owes the caller
        if (z(sp.nvars) < -1e-9) {
          accepted = true;
          break;
        }
        if (cr.message != "centering failed to converge") {
          fail_msg = "phase I: " + cr.message;
          break;
        }
      }
      if (cr.ok && nu / t <= std::max(1e-10, 0.25 * std::abs(z(sp.nvars)))) break;
      t *= options.path_multiplier;
    }
    if (!fail_msg.empty()) {
      return finalize(SolveReport::Status::numerical_failure, fail_msg);
    }
    if (!accepted && z(sp.nvars) > -1e-12) {
      std::ostringstream msg;
      msg << "infeasible: no strictly feasible point exists; minimal uniform slack over all "
             "constraint blocks is "
          << z(sp.nvars) << " (scaled units, must be negative)";
      y = z.head(sp.nvars);
      return finalize(SolveReport::Status::infeasible, msg.str());
    }
    y = z.head(sp.nvars);
  }

  // ---- Phase II: follow the central path on the true objective
  {
    Barrier barrier(sp, /*phase1=*/false);
    const double nu = barrier.barrier_count();
    if (sp.c.cwiseAbs().maxCoeff() == 0.0) {
      report.duality_gap = 0.0;
      return finalize(SolveReport::Status::optimal, "feasibility problem: interior point found");
    }
    double t = 1.0;
    for (int stage = 0; stage < 80; ++stage) {
      const CenterResult cr = center(barrier, sp.c, t, y, &newton_steps, options.max_newton_steps);
      if (!cr.ok) {
        return finalize(SolveReport::Status::numerical_failure, "phase II: " + cr.message);
      }
      const double obj_scaled = sp.c.dot(y);
      if (nu / t <= options.tolerance * std::max(1.0, std::abs(obj_scaled))) {
        report.duality_gap = sp.c_scale * nu / t;
        return finalize(SolveReport::Status::optimal, "optimal");
      }
      t *= options.path_multiplier;
    }
    report.duality_gap = sp.c_scale * nu / t;
    return finalize(SolveReport::Status::numerical_failure,
                    "path following exceeded the stage limit");
  }
}

}  // namespace uavisac::conic
