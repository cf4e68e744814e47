#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "uavisac/geometry.hpp"

using namespace uavisac;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE_BEGIN("geometry");

TEST_CASE("aod vertical link uses the azimuth convention") {
  const Aod a = aod(Vec3(0, 0, 100), Vec3(0, 0, 0));
  CHECK(a.azimuth == doctest::Approx(0.0));
  CHECK(a.elevation == doctest::Approx(kPi));
}

TEST_CASE("aod horizontal along x") {
  const Aod a = aod(Vec3(0, 0, 50), Vec3(100, 0, 50));
  CHECK(a.azimuth == doctest::Approx(0.0));
  CHECK(a.elevation == doctest::Approx(kPi / 2));
}

TEST_CASE("aod oblique case") {
  // ||delta|| = sqrt(15000), elevation = acos(-100/122.474487...)
  const Aod a = aod(Vec3(0, 0, 100), Vec3(50, 50, 0));
  CHECK(a.azimuth == doctest::Approx(kPi / 4).epsilon(1e-12));
  CHECK(a.elevation == doctest::Approx(2.5261129449194059).epsilon(1e-12));
}

TEST_CASE("aod rejects coincident points") {
  CHECK_THROWS_AS(aod(Vec3(1, 2, 3), Vec3(1, 2, 3)), Error);
}

TEST_CASE("aod ranges") {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 s(u(eng), u(eng), u(eng));
    const Vec3 t(u(eng), u(eng), u(eng));
    if ((t - s).norm() == 0.0) continue;
    const Aod a = aod(s, t);
    CHECK(a.azimuth > -kPi);
    CHECK(a.azimuth <= kPi);
    CHECK(a.elevation >= 0.0);
    CHECK(a.elevation <= kPi);
  }
}

TEST_CASE("wavevector values and norm") {
  const Vec3 k1 = wavevector(Aod{0.0, kPi / 2}, 0.1);
  CHECK(k1.x() == doctest::Approx(62.831853071795865).epsilon(1e-12));
  CHECK(k1.y() == doctest::Approx(0.0));
  CHECK(std::abs(k1.z()) < 1e-12);

  const Vec3 k2 = wavevector(Aod{0.3, 0.0}, 0.25);
  CHECK(k2.x() == doctest::Approx(0.0));
  CHECK(k2.z() == doctest::Approx(2 * kPi / 0.25).epsilon(1e-12));

  const Vec3 k3 = wavevector(Aod{kPi / 2, kPi / 2}, 1.0);
  CHECK(k3.y() == doctest::Approx(2 * kPi).epsilon(1e-12));

  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> az(-kPi, kPi), el(0.0, kPi), lam(1e-3, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double wavelength = lam(eng);
    const Vec3 k = wavevector(Aod{az(eng), el(eng)}, wavelength);
    CHECK(k.norm() == doctest::Approx(2 * kPi / wavelength).epsilon(1e-12));
  }
}

TEST_CASE("aod then unit_direction round-trips the direction") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 s(u(eng), u(eng), u(eng));
    const Vec3 t(u(eng), u(eng), u(eng));
    const double dist = (t - s).norm();
    if (dist < 1e-9) continue;
    const Vec3 d = unit_direction(aod(s, t));
    CHECK((d - (t - s) / dist).norm() < 1e-12);
  }
}

TEST_CASE("array_response magnitudes and phases") {
  SUBCASE("single element at the origin") {
    Eigen::Matrix3Xd q(3, 1);
    q.setZero();
    const Eigen::VectorXcd a = array_response(q, Aod{0.4, 1.1}, 0.1);
    CHECK(a(0).real() == doctest::Approx(1.0));
    CHECK(a(0).imag() == doctest::Approx(0.0));
  }
  SUBCASE("half-wavelength pair along x at broadside") {
    Eigen::Matrix3Xd q(3, 2);
    q.setZero();
    q(0, 1) = 0.05;  // lambda/2 with lambda = 0.1
    const Eigen::VectorXcd a = array_response(q, Aod{0.0, kPi / 2}, 0.1);
    CHECK(a(0).real() == doctest::Approx(1.0));
    CHECK(a(1).real() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(a(1).imag()) < 1e-12);
  }
  SUBCASE("full-turn phases wrap to one") {
    // q^T kappa = 2 pi for every element
    Eigen::Matrix3Xd q(3, 3);
    q.setZero();
    q.row(0).setConstant(1.0);  // unit offsets along x against kappa = 2 pi e_x
    const Eigen::VectorXcd a = array_response(q, Aod{0.0, kPi / 2}, 1.0);
    for (int m = 0; m < 3; ++m) {
      CHECK(a(m).real() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(a(m).imag()) < 1e-9);
    }
  }
  SUBCASE("unit magnitude everywhere") {
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      Eigen::Matrix3Xd q(3, 8);
      for (int m = 0; m < 8; ++m) q.col(m) = Vec3(u(eng), u(eng), u(eng));
      const Eigen::VectorXcd a = array_response(q, Aod{u(eng) * kPi, (u(eng) + 1) * kPi / 2}, 0.3);
      for (int m = 0; m < 8; ++m) CHECK(std::abs(a(m)) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(a.squaredNorm() == doctest::Approx(8.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("upa_layout") {
  SUBCASE("degenerate single element") {
    const Eigen::Matrix3Xd q = upa_layout(1, 1, 0.05);
    REQUIRE(q.cols() == 1);
    CHECK(q.col(0).norm() == doctest::Approx(0.0));
  }
  SUBCASE("two-element centering") {
    const Eigen::Matrix3Xd q = upa_layout(2, 1, 0.05);
    REQUIRE(q.cols() == 2);
    CHECK(q(0, 0) == doctest::Approx(-0.025));
    CHECK(q(0, 1) == doctest::Approx(0.025));
    CHECK(q.row(1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("4x4 grid at half-wavelength pitch") {
    const double spacing = 0.05;
    const Eigen::Matrix3Xd q = upa_layout(4, 4, spacing);
    REQUIRE(q.cols() == 16);
    CHECK(q.rowwise().sum().norm() < 1e-12);  // centered
    double min_dist = 1e9;
    for (int i = 0; i < 16; ++i) {
      for (int j = i + 1; j < 16; ++j) {
        min_dist = std::min(min_dist, (q.col(i) - q.col(j)).norm());
      }
    }
    CHECK(min_dist == doctest::Approx(spacing).epsilon(1e-12));
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(upa_layout(0, 1, 0.05), Error);
    CHECK_THROWS_AS(upa_layout(1, 1, 0.0), Error);
  }
}

TEST_SUITE_END();
