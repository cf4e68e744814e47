#include "uavisac/montecarlo.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "uavisac/channel.hpp"

namespace uavisac {

namespace {

// Uniform in (0, 1], 53-bit mantissa straight from the engine words.
double uniform_open(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

// Box-Muller pair; callers consume both values to keep the draw order fixed.
void normal_pair(std::mt19937_64& eng, double& a, double& b) {
  const double u1 = uniform_open(eng);
  const double u2 = uniform_open(eng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  a = r * std::cos(phi);
  b = r * std::sin(phi);
}

Vec3 normal3(std::mt19937_64& eng) {
  double a, b, c, d;
  normal_pair(eng, a, b);
  normal_pair(eng, c, d);
  (void)d;
  return Vec3(a, b, c);
}

Vec3 unit_ball_point(std::mt19937_64& eng, bool boundary) {
  Vec3 dir = normal3(eng);
  double norm = dir.norm();
  while (norm == 0.0) {
    dir = normal3(eng);
    norm = dir.norm();
  }
  dir /= norm;
  if (boundary) return dir;
  const double radius = std::cbrt(uniform_open(eng));
  return radius * dir;
}

Mat3 strict_inverse_sqrt(const Mat3& fim) {
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(fim);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    raise(ErrorCode::rank_deficient_geometry,
          "LseSampler: the FIM must be positive definite to define the error shape");
  }
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace

LseFamily lse_family_from_name(std::string_view name) {
  if (name == "ellipsoid") return LseFamily::ellipsoid;
  if (name == "gaussian") return LseFamily::gaussian;
  if (name == "uniform-ellipsoid") return LseFamily::uniform_ellipsoid;
  if (name == "rademacher-mixture") return LseFamily::rademacher_mixture;
  raise(ErrorCode::invalid_argument, "unknown LSE family: " + std::string(name));
}

const char* lse_family_name(LseFamily family) {
  switch (family) {
    case LseFamily::ellipsoid: return "ellipsoid";
    case LseFamily::gaussian: return "gaussian";
    case LseFamily::uniform_ellipsoid: return "uniform-ellipsoid";
    case LseFamily::rademacher_mixture: return "rademacher-mixture";
  }
  return "unknown";
}

LseSampler::LseSampler(LseFamily family, const Mat3& fim, double scale, std::uint64_t seed)
    : family_(family), sqrt_inv_(strict_inverse_sqrt(fim)), scale_(scale), seed_(seed) {}

LseSampler LseSampler::ellipsoid(const Mat3& fim, double delta, std::uint64_t seed) {
  if (!(delta > 0.0)) raise(ErrorCode::invalid_argument, "LseSampler: delta must be > 0");
  return LseSampler(LseFamily::ellipsoid, fim, std::sqrt(delta), seed);
}

LseSampler LseSampler::gaussian(const Mat3& fim, std::uint64_t seed) {
  return LseSampler(LseFamily::gaussian, fim, 1.0, seed);
}

LseSampler LseSampler::arbitrary(const Mat3& fim, LseFamily family, std::uint64_t seed) {
  switch (family) {
    case LseFamily::gaussian:
      return gaussian(fim, seed);
    case LseFamily::uniform_ellipsoid:
      // a uniform unit-ball draw has covariance I/5
      return LseSampler(LseFamily::uniform_ellipsoid, fim, std::sqrt(5.0), seed);
    case LseFamily::rademacher_mixture:
      return LseSampler(LseFamily::rademacher_mixture, fim, 1.0, seed);
    case LseFamily::ellipsoid:
      raise(ErrorCode::invalid_argument,
            "LseSampler::arbitrary: the bounded ellipsoid is not a moment-matched family");
  }
  raise(ErrorCode::invalid_argument, "LseSampler::arbitrary: unknown family");
}

Eigen::Matrix3Xd LseSampler::sample(int n) const {
  if (n < 1) raise(ErrorCode::invalid_argument, "LseSampler::sample: n must be >= 1");
  std::mt19937_64 eng(seed_);
  Eigen::Matrix3Xd out(3, n);
  for (int i = 0; i < n; ++i) {
    switch (family_) {
      case LseFamily::ellipsoid:
        out.col(i) = scale_ * (sqrt_inv_ * unit_ball_point(eng, false));
        break;
      case LseFamily::gaussian:
        out.col(i) = sqrt_inv_ * normal3(eng);
        break;
      case LseFamily::uniform_ellipsoid:
        out.col(i) = scale_ * (sqrt_inv_ * unit_ball_point(eng, false));
        break;
      case LseFamily::rademacher_mixture: {
        const std::uint64_t bits = eng();
        const Vec3 r((bits & 1u) ? 1.0 : -1.0, (bits & 2u) ? 1.0 : -1.0,
                     (bits & 4u) ? 1.0 : -1.0);
        out.col(i) = sqrt_inv_ * r;
        break;
      }
    }
  }
  return out;
}

Eigen::Matrix3Xd LseSampler::sample_boundary(int n) const {
  if (family_ != LseFamily::ellipsoid) {
    raise(ErrorCode::invalid_argument,
          "LseSampler::sample_boundary: defined for the ellipsoid model only");
  }
  if (n < 1) raise(ErrorCode::invalid_argument, "LseSampler::sample_boundary: n must be >= 1");
  std::mt19937_64 eng(seed_ ^ 0x9e3779b97f4a7c15ull);
  Eigen::Matrix3Xd out(3, n);
  for (int i = 0; i < n; ++i) {
    out.col(i) = scale_ * (sqrt_inv_ * unit_ball_point(eng, true));
  }
  return out;
}

OutageReport empirical_outage(const Scenario& scenario, const PowerAllocation& allocation,
                              const Eigen::Matrix3Xd& lse_batch, double rate_floor) {
  const int n = static_cast<int>(lse_batch.cols());
  if (n < 1) raise(ErrorCode::invalid_argument, "empirical_outage: empty sample batch");
  const int k_count = scenario.uav_count();
  if (allocation.comm.size() != k_count) {
    raise(ErrorCode::invalid_argument, "empirical_outage: allocation does not match scenario");
  }

  // rate < rate_floor  <=>  ||u_hat + du - p_k||^2 > gamma_k * Pc_k, which
  // avoids K * n log evaluations.
  OutageReport report;
  report.samples = n;
  report.fraction = Eigen::VectorXd::Zero(k_count);
  report.halfwidth = Eigen::VectorXd::Zero(k_count);
  const Eigen::VectorXd gamma = gamma_coefficients(scenario, rate_floor);
  for (int k = 0; k < k_count; ++k) {
    const Vec3 a = scenario.ue_estimate - scenario.uav_positions[static_cast<size_t>(k)];
    const double threshold = gamma(k) * allocation.comm(k);
    int violations = 0;
    for (int i = 0; i < n; ++i) {
      const double d2 = (a + lse_batch.col(i)).squaredNorm();
      if (d2 > threshold) ++violations;
    }
    const double p = static_cast<double>(violations) / n;
    report.fraction(k) = p;
    report.halfwidth(k) = 1.96 * std::sqrt(p * (1.0 - p) / n);
  }
  return report;
}

}  // namespace uavisac
