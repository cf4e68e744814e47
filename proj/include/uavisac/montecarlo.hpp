#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

#include "uavisac/allocators.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/types.hpp"

namespace uavisac {

enum class LseFamily {
  ellipsoid,          // bounded: uniform in {du : du^T J du <= delta}
  gaussian,           // N(0, J^-1)
  uniform_ellipsoid,  // uniform in an ellipsoid rescaled to covariance J^-1
  rademacher_mixture  // S r with r in {-1,+1}^3 iid, S S^T = J^-1
};

LseFamily lse_family_from_name(std::string_view name);
const char* lse_family_name(LseFamily family);

/// Deterministic sampler of location sensing errors: identical
/// (seed, model, n) produce bit-identical batches. The randomness is drawn
/// from a fixed-width engine through fully specified transforms, so batches
/// do not depend on the standard library's distribution internals.
class LseSampler {
 public:
  static LseSampler ellipsoid(const Mat3& fim, double delta, std::uint64_t seed);
  static LseSampler gaussian(const Mat3& fim, std::uint64_t seed);
  static LseSampler arbitrary(const Mat3& fim, LseFamily family, std::uint64_t seed);

  /// n columns of LSE draws.
  Eigen::Matrix3Xd sample(int n) const;
  /// Ellipsoid model only: draws on the boundary du^T J du = delta.
  Eigen::Matrix3Xd sample_boundary(int n) const;

  LseFamily family() const { return family_; }

 private:
  LseSampler(LseFamily family, const Mat3& fim, double scale, std::uint64_t seed);

  LseFamily family_;
  Mat3 sqrt_inv_;  // J^-1/2
  double scale_ = 1.0;
  std::uint64_t seed_ = 0;
};

struct OutageReport {
  Eigen::VectorXd fraction;   // per UAV: share of samples with rate < rate_floor
  Eigen::VectorXd halfwidth;  // 95% binomial half-width per UAV
  int samples = 0;
};

OutageReport empirical_outage(const Scenario& scenario, const PowerAllocation& allocation,
                              const Eigen::Matrix3Xd& lse_batch, double rate_floor);

}  // namespace uavisac
