#pragma once

#include <Eigen/Dense>

#include "uavisac/types.hpp"

namespace uavisac {

/// Angle of departure toward a target, azimuth in (-pi, pi], elevation in [0, pi].
struct Aod {
  double azimuth = 0.0;
  double elevation = 0.0;
};

/// Angles of the direction source -> target. The degenerate vertical link
/// (both horizontal deltas zero) gets azimuth 0 by convention.
/// Throws invalid_geometry for coincident points.
Aod aod(const Vec3& source, const Vec3& target);

/// Unit direction [sin el cos az, sin el sin az, cos el].
Vec3 unit_direction(const Aod& angles);

/// kappa(theta) = (2*pi/lambda) * unit_direction(theta); norm is 2*pi/lambda.
Vec3 wavevector(const Aod& angles, double wavelength);

/// Planar-array response a(theta), element m = exp(j q_m^T kappa(theta)).
/// Every element has unit magnitude.
Eigen::VectorXcd array_response(const Eigen::Matrix3Xd& offsets, const Aod& angles,
                                double wavelength);

/// Element offsets of a rows x cols uniform planar array in the local x-y
/// plane, grid pitch `spacing`, centered on the origin.
Eigen::Matrix3Xd upa_layout(int rows, int cols, double spacing);

}  // namespace uavisac
