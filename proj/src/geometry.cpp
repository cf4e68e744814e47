#include "uavisac/geometry.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace uavisac {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Aod aod(const Vec3& source, const Vec3& target) {
  const Vec3 delta = target - source;
  const double dist = delta.norm();
  if (dist == 0.0) {
    std::ostringstream msg;
    msg << "aod: source and target coincide at (" << source.transpose() << ")";
    raise(ErrorCode::invalid_geometry, msg.str());
  }
  Aod out;
  out.elevation = std::acos(std::clamp(delta.z() / dist, -1.0, 1.0));
  if (delta.x() == 0.0 && delta.y() == 0.0) {
    out.azimuth = 0.0;  // vertical link, azimuth undefined
  } else {
    out.azimuth = std::atan2(delta.y(), delta.x());
    if (out.azimuth <= -std::numbers::pi) out.azimuth = std::numbers::pi;
  }
  return out;
}

Vec3 unit_direction(const Aod& angles) {
  const double se = std::sin(angles.elevation);
  return Vec3(se * std::cos(angles.azimuth), se * std::sin(angles.azimuth),
              std::cos(angles.elevation));
}

Vec3 wavevector(const Aod& angles, double wavelength) {
  if (!(wavelength > 0.0)) {
    raise(ErrorCode::invalid_argument, "wavevector: wavelength must be positive");
  }
  return (kTwoPi / wavelength) * unit_direction(angles);
}

Eigen::VectorXcd array_response(const Eigen::Matrix3Xd& offsets, const Aod& angles,
                                double wavelength) {
  const Vec3 kappa = wavevector(angles, wavelength);
  Eigen::VectorXcd response(offsets.cols());
  for (Eigen::Index m = 0; m < offsets.cols(); ++m) {
    const double phase = offsets.col(m).dot(kappa);
    response(m) = std::polar(1.0, phase);
  }
  return response;
}

Eigen::Matrix3Xd upa_layout(int rows, int cols, double spacing) {
  if (rows < 1 || cols < 1) {
    raise(ErrorCode::invalid_argument, "upa_layout: rows and cols must be >= 1");
  }
  if (!(spacing > 0.0)) {
    raise(ErrorCode::invalid_argument, "upa_layout: spacing must be positive");
  }
  Eigen::Matrix3Xd offsets(3, static_cast<Eigen::Index>(rows) * cols);
  const double x0 = -0.5 * (rows - 1) * spacing;
  const double y0 = -0.5 * (cols - 1) * spacing;
  Eigen::Index m = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j, ++m) {
      offsets.col(m) = Vec3(x0 + i * spacing, y0 + j * spacing, 0.0);
    }
  }
  return offsets;
}

}  // namespace uavisac
