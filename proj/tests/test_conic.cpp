#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "uavisac/conic.hpp"

using namespace uavisac;
using namespace uavisac::conic;

TEST_SUITE_BEGIN("conic");

TEST_CASE("min tr X with X >= I") {
  ConicProblem prob;
  const SymVar x = prob.add_symmetric("X", 2);
  MatExpr shifted = prob.expr(x);
  shifted.add_constant(-Eigen::Matrix2d::Identity());
  prob.add_lmi(std::move(shifted), "X-I");
  prob.minimize(LinExpr::variable(x.at(0, 0)) + LinExpr::variable(x.at(1, 1)));
  const SolveReport report = solve(prob);
  REQUIRE(report.optimal());
  CHECK(report.optimum == doctest::Approx(2.0).epsilon(1e-6));
  const Eigen::MatrixXd xval = report.value(x);
  CHECK((xval - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("determinant LMI golden case") {
  // min x s.t. [[x, 1], [1, x]] >= 0  ->  x = 1
  ConicProblem prob;
  const VarId x = prob.add_scalar("x");
  MatExpr lmi(2);
  lmi.add_at(0, 0, LinExpr::variable(x));
  lmi.add_at(1, 1, LinExpr::variable(x));
  lmi.add_at(0, 1, LinExpr(1.0));
  prob.add_lmi(std::move(lmi), "det");
  prob.minimize(LinExpr::variable(x));
  const SolveReport report = solve(prob);
  REQUIRE(report.optimal());
  CHECK(report.optimum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("random LPs against vertex enumeration") {
  std::mt19937_64 eng(41);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> rhs(0.5, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    // constraints a_i . x <= b_i with the origin strictly inside, plus a box
    constexpr int m = 5;
    constexpr double box = 10.0;
    std::vector<Eigen::Vector2d> a;
    std::vector<double> b;
    for (int i = 0; i < m; ++i) {
      a.emplace_back(coef(eng), coef(eng));
      b.push_back(rhs(eng));
    }
    a.emplace_back(1, 0);
    b.push_back(box);
    a.emplace_back(-1, 0);
    b.push_back(box);
    a.emplace_back(0, 1);
    b.push_back(box);
    a.emplace_back(0, -1);
    b.push_back(box);
    const Eigen::Vector2d c(coef(eng), coef(eng));

    // oracle: enumerate candidate vertices over constraint pairs
    double best = std::numeric_limits<double>::infinity();
    const int total = static_cast<int>(a.size());
    for (int i = 0; i < total; ++i) {
      for (int j = i + 1; j < total; ++j) {
        Eigen::Matrix2d basis;
        basis.row(0) = a[static_cast<size_t>(i)].transpose();
        basis.row(1) = a[static_cast<size_t>(j)].transpose();
        if (std::abs(basis.determinant()) < 1e-9) continue;
        const Eigen::Vector2d v =
            basis.inverse() * Eigen::Vector2d(b[static_cast<size_t>(i)], b[static_cast<size_t>(j)]);
        bool feasible = true;
        for (int l = 0; l < total; ++l) {
          if (a[static_cast<size_t>(l)].dot(v) > b[static_cast<size_t>(l)] + 1e-9) {
            feasible = false;
            break;
          }
        }
        if (feasible) best = std::min(best, c.dot(v));
      }
    }
    REQUIRE(std::isfinite(best));

    ConicProblem prob;
    const VarId x0 = prob.add_scalar("x0");
    const VarId x1 = prob.add_scalar("x1");
    for (int i = 0; i < total; ++i) {
      prob.add_linear_ge(LinExpr(b[static_cast<size_t>(i)]) -
                             a[static_cast<size_t>(i)](0) * LinExpr::variable(x0) -
                             a[static_cast<size_t>(i)](1) * LinExpr::variable(x1),
                         "c" + std::to_string(i));
    }
    prob.minimize(c(0) * LinExpr::variable(x0) + c(1) * LinExpr::variable(x1));
    const SolveReport report = solve(prob);
    REQUIRE(report.optimal());
    CHECK(report.optimum == doctest::Approx(best).epsilon(1e-5));
  }
}

TEST_CASE("trace-inverse epigraph on fixed matrices") {
  SUBCASE("identity gives 3") {
    ConicProblem prob;
    prob.minimize(prob.trace_inverse_epigraph(MatExpr::constant(Eigen::Matrix3d::Identity()), "epi"));
    const SolveReport report = solve(prob);
    REQUIRE(report.optimal());
    CHECK(report.optimum == doctest::Approx(3.0).epsilon(1e-6));
  }
  SUBCASE("diag(1,2,4) gives 1.75") {
    ConicProblem prob;
    const Eigen::Vector3d d(1.0, 2.0, 4.0);
    prob.minimize(prob.trace_inverse_epigraph(
        MatExpr::constant(Eigen::Matrix3d(d.asDiagonal())), "epi"));
    const SolveReport report = solve(prob);
    REQUIRE(report.optimal());
    CHECK(report.optimum == doctest::Approx(1.75).epsilon(1e-6));
  }
  SUBCASE("free scale pushes to the power cap") {
    // J = p I, p <= 2: minimizing tr(T) drives p to 2, tr = 1.5
    ConicProblem prob;
    const VarId p = prob.add_scalar("p");
    MatExpr j(3);
    j.add_scaled(LinExpr::variable(p), Eigen::Matrix3d::Identity());
    prob.minimize(prob.trace_inverse_epigraph(j, "epi"));
    prob.add_linear_ge(LinExpr(2.0) - LinExpr::variable(p), "cap");
    prob.add_linear_ge(LinExpr::variable(p) - LinExpr(1.0), "floor");
    const SolveReport report = solve(prob);
    REQUIRE(report.optimal());
    CHECK(report.optimum == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(report.assignment(p) == doctest::Approx(2.0).epsilon(1e-5));
  }
  SUBCASE("random PD matrices within 1e-6 relative") {
    std::mt19937_64 eng(43);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::Matrix3d g;
      for (int r = 0; r < 3; ++r) {
        for (int cidx = 0; cidx < 3; ++cidx) g(r, cidx) = u(eng);
      }
      const Eigen::Matrix3d j = g * g.transpose() + 0.2 * Eigen::Matrix3d::Identity();
      ConicProblem prob;
      prob.minimize(prob.trace_inverse_epigraph(MatExpr::constant(j), "epi"));
      const SolveReport report = solve(prob);
      REQUIRE(report.optimal());
      CHECK(report.optimum == doctest::Approx(j.inverse().trace()).epsilon(1e-6));
    }
  }
}

TEST_CASE("solver determinism") {
  auto build_and_solve = [] {
    ConicProblem prob;
    const SymVar x = prob.add_symmetric("X", 3);
    MatExpr shifted = prob.expr(x);
    Eigen::Matrix3d floor_m;
    floor_m << 2, 0.3, 0, 0.3, 1, 0.1, 0, 0.1, 0.5;
    shifted.add_constant(-floor_m);
    prob.add_lmi(std::move(shifted), "X-floor");
    LinExpr obj;
    for (int i = 0; i < 3; ++i) obj += LinExpr::variable(x.at(i, i));
    obj += 0.5 * LinExpr::variable(x.at(0, 1));
    prob.minimize(obj);
    return solve(prob);
  };
  const SolveReport r1 = build_and_solve();
  const SolveReport r2 = build_and_solve();
  REQUIRE(r1.optimal());
  REQUIRE(r2.optimal());
  CHECK(r1.optimum == r2.optimum);
  CHECK(r1.iterations == r2.iterations);
  CHECK((r1.assignment - r2.assignment).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("infeasible systems are reported with a diagnostic") {
  ConicProblem prob;
  const VarId x = prob.add_scalar("x");
  prob.add_linear_ge(LinExpr::variable(x) - LinExpr(1.0), "x>=1");
  prob.add_linear_ge(LinExpr(-0.5) - LinExpr::variable(x), "x<=-0.5");
  prob.minimize(LinExpr::variable(x));
  const SolveReport report = solve(prob);
  CHECK(report.status == SolveReport::Status::infeasible);
  CHECK(report.message.find("infeasible") != std::string::npos);
}

TEST_CASE("equality constraints are eliminated") {
  SUBCASE("solvable") {
    ConicProblem prob;
    const VarId x = prob.add_scalar("x");
    const VarId y = prob.add_scalar("y");
    prob.add_linear_eq(LinExpr::variable(x) - LinExpr::variable(y) - LinExpr(1.0), "x-y=1");
    prob.add_linear_ge(LinExpr::variable(x), "x>=0");
    prob.add_linear_ge(LinExpr::variable(y), "y>=0");
    prob.minimize(LinExpr::variable(x) + LinExpr::variable(y));
    const SolveReport report = solve(prob);
    REQUIRE(report.optimal());
    CHECK(report.optimum == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(report.assignment(x) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(report.assignment(y) == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(report.residual_affine < 1e-7);
  }
  SUBCASE("inconsistent") {
    ConicProblem prob;
    const VarId x = prob.add_scalar("x");
    prob.add_linear_eq(LinExpr::variable(x) - LinExpr(1.0), "x=1");
    prob.add_linear_eq(LinExpr::variable(x) - LinExpr(2.0), "x=2");
    prob.minimize(LinExpr::variable(x));
    const SolveReport report = solve(prob);
    CHECK(report.status == SolveReport::Status::infeasible);
  }
}

TEST_CASE("problem dump lists blocks and entries") {
  ConicProblem prob;
  const VarId x = prob.add_scalar("x");
  MatExpr lmi(2);
  lmi.add_at(0, 0, LinExpr::variable(x));
  lmi.add_at(1, 1, LinExpr(1.0));
  prob.add_lmi(std::move(lmi), "blk");
  prob.add_linear_ge(LinExpr(5.0) - LinExpr::variable(x), "cap");
  prob.minimize(LinExpr::variable(x));
  std::ostringstream os;
  prob.dump(os);
  const std::string text = os.str();
  CHECK(text.find("nvars 1") != std::string::npos);
  CHECK(text.find("block 0 2 blk") != std::string::npos);
  CHECK(text.find("block 1 1 cap") != std::string::npos);
  CHECK(text.find("c 0 1") != std::string::npos);
}

TEST_CASE("reports carry small residuals at the returned point") {
  ConicProblem prob;
  const SymVar x = prob.add_symmetric("X", 2);
  MatExpr shifted = prob.expr(x);
  shifted.add_constant(-Eigen::Matrix2d::Identity());
  prob.add_lmi(std::move(shifted), "X-I");
  LinExpr obj = LinExpr::variable(x.at(0, 0)) + LinExpr::variable(x.at(1, 1));
  prob.minimize(obj);
  const SolveReport report = solve(prob);
  REQUIRE(report.optimal());
  CHECK(report.residual_psd == 0.0);  // interior method never leaves the cone
  CHECK(report.duality_gap < 1e-5);
  CHECK(report.value(obj) == doctest::Approx(report.optimum));
}

TEST_SUITE_END();
