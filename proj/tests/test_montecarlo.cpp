#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"
#include "uavisac/allocators.hpp"
#include "uavisac/channel.hpp"
#include "uavisac/montecarlo.hpp"

using namespace uavisac;

namespace {

Mat3 random_pd(std::mt19937_64& eng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat3 g;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) g(r, c) = u(eng);
  return g * g.transpose() + 0.4 * Mat3::Identity();
}

}  // namespace

TEST_SUITE_BEGIN("montecarlo");

TEST_CASE("seed determinism") {
  std::mt19937_64 eng(71);
  const Mat3 j = random_pd(eng);
  for (const LseFamily family :
       {LseFamily::gaussian, LseFamily::uniform_ellipsoid, LseFamily::rademacher_mixture}) {
    const LseSampler a = LseSampler::arbitrary(j, family, 12345);
    const LseSampler b = LseSampler::arbitrary(j, family, 12345);
    const Eigen::Matrix3Xd s1 = a.sample(512);
    const Eigen::Matrix3Xd s2 = b.sample(512);
    CHECK((s1 - s2).cwiseAbs().maxCoeff() == 0.0);
    const LseSampler c = LseSampler::arbitrary(j, family, 54321);
    CHECK((c.sample(512) - s1).cwiseAbs().maxCoeff() > 0.0);
  }
  const LseSampler e1 = LseSampler::ellipsoid(j, 2.0, 99);
  const LseSampler e2 = LseSampler::ellipsoid(j, 2.0, 99);
  CHECK((e1.sample(256) - e2.sample(256)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((e1.sample_boundary(256) - e2.sample_boundary(256)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ellipsoid samples never leave the set") {
  std::mt19937_64 eng(73);
  const Mat3 j = random_pd(eng);
  const double delta = 2.5;
  const LseSampler sampler = LseSampler::ellipsoid(j, delta, 2024);
  const Eigen::Matrix3Xd batch = sampler.sample(100000);
  double max_quad = 0.0;
  for (int i = 0; i < batch.cols(); ++i) {
    max_quad = std::max(max_quad, double(batch.col(i).transpose() * j * batch.col(i)));
  }
  CHECK(max_quad <= delta * (1 + 1e-12));
  const Eigen::Matrix3Xd boundary = sampler.sample_boundary(1000);
  for (int i = 0; i < boundary.cols(); ++i) {
    CHECK(double(boundary.col(i).transpose() * j * boundary.col(i)) ==
          doctest::Approx(delta).epsilon(1e-9));
  }
}

TEST_CASE("moment audit of the arbitrary families") {
  std::mt19937_64 eng(79);
  const Mat3 j = random_pd(eng);
  const Mat3 cov_target = j.inverse();
  const int n = 1000000;
  for (const LseFamily family :
       {LseFamily::gaussian, LseFamily::uniform_ellipsoid, LseFamily::rademacher_mixture}) {
    const LseSampler sampler = LseSampler::arbitrary(j, family, 5150);
    const Eigen::Matrix3Xd batch = sampler.sample(n);
    const Vec3 mean = batch.rowwise().mean();
    CHECK(mean.norm() <= 4.0 * std::sqrt(cov_target.trace() / n));
    Mat3 cov = Mat3::Zero();
    for (int i = 0; i < n; ++i) {
      const Vec3 centered = batch.col(i) - mean;
      cov += centered * centered.transpose();
    }
    cov /= n;
    CHECK((cov - cov_target).norm() / cov_target.norm() <= 0.05);
  }
}

TEST_CASE("rademacher covariance identity is exact per sample") {
  // S r r^T S^T averaged over the 8 sign patterns equals S S^T = J^-1
  std::mt19937_64 eng(83);
  const Mat3 j = random_pd(eng);
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(j);
  const Mat3 s_mat = eig.operatorInverseSqrt();
  Mat3 acc = Mat3::Zero();
  for (int bits = 0; bits < 8; ++bits) {
    const Vec3 r((bits & 1) ? 1 : -1, (bits & 2) ? 1 : -1, (bits & 4) ? 1 : -1);
    const Vec3 x = s_mat * r;
    acc += x * x.transpose();
  }
  acc /= 8.0;
  CHECK((acc - j.inverse()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("singular shapes are rejected") {
  Mat3 j = Mat3::Zero();
  j(0, 0) = 1.0;
  CHECK_THROWS_AS(LseSampler::gaussian(j, 1), Error);
  CHECK_THROWS_AS(LseSampler::ellipsoid(Mat3::Identity(), 0.0, 1), Error);
  CHECK_THROWS_AS(LseSampler::arbitrary(Mat3::Identity(), LseFamily::ellipsoid, 1), Error);
}

TEST_CASE("family names round-trip") {
  for (const LseFamily f : {LseFamily::ellipsoid, LseFamily::gaussian,
                            LseFamily::uniform_ellipsoid, LseFamily::rademacher_mixture}) {
    CHECK(lse_family_from_name(lse_family_name(f)) == f);
  }
  CHECK_THROWS_AS(lse_family_from_name("cauchy"), Error);
}

TEST_CASE("empirical_outage edge cases") {
  const Scenario s = testing::triangle_scenario();
  const double rbar = 10.0;
  PowerAllocation alloc;
  alloc.sensing = Eigen::VectorXd::Constant(3, 0.3);
  alloc.comm.resize(3);
  const ChannelEstimate est = channel_estimate(s);
  for (int k = 0; k < 3; ++k) {
    const double d = est.distance[static_cast<size_t>(k)];
    alloc.comm(k) = d * d / gamma_coefficient(s, k, rbar) * (1 + 1e-12);
  }

  SUBCASE("zero LSE with a binding allocation records no outage") {
    const Eigen::Matrix3Xd zeros = Eigen::Matrix3Xd::Zero(3, 100);
    const OutageReport report = empirical_outage(s, alloc, zeros, rbar);
    CHECK(report.fraction.maxCoeff() == 0.0);
  }
  SUBCASE("zero power means certain outage") {
    PowerAllocation dark = alloc;
    dark.comm.setZero();
    const Eigen::Matrix3Xd zeros = Eigen::Matrix3Xd::Zero(3, 100);
    const OutageReport report = empirical_outage(s, dark, zeros, rbar);
    CHECK(report.fraction.minCoeff() == 1.0);
  }
  SUBCASE("empty batches are rejected") {
    CHECK_THROWS_AS(empirical_outage(s, alloc, Eigen::Matrix3Xd(3, 0), rbar), Error);
  }
}

TEST_CASE("outage agrees with direct rate evaluation") {
  const Scenario s = testing::triangle_scenario();
  const double rbar = 10.0;
  PowerAllocation alloc;
  alloc.sensing = Eigen::VectorXd::Constant(3, 0.3);
  alloc.comm = Eigen::VectorXd::Constant(3, 0.017);
  const Mat3 j = fim(s, alloc.sensing).matrix;
  const LseSampler sampler = LseSampler::gaussian(j, 11);
  const Eigen::Matrix3Xd batch = sampler.sample(2000);
  const OutageReport report = empirical_outage(s, alloc, batch, rbar);
  for (int k = 0; k < 3; ++k) {
    int direct = 0;
    for (int i = 0; i < batch.cols(); ++i) {
      if (rate(s, k, alloc.comm(k), batch.col(i)) < rbar) ++direct;
    }
    CHECK(report.fraction(k) == doctest::Approx(direct / 2000.0).epsilon(1e-12));
  }
}

TEST_SUITE_END();
