#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace uavisac {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ErrorCode {
  invalid_argument,
  invalid_geometry,
  rank_deficient_geometry,
  schema,
  io,
  budget_infeasible,
  geometry_infeasible,
  sca_infeasible_iterate,
  solver_infeasible,
  numerical_failure,
};

/// Library-wide exception; the C API maps ErrorCode to status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace uavisac
