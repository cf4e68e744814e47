#pragma once

#include <Eigen/Dense>

#include <optional>

#include "uavisac/geometry.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/types.hpp"

namespace uavisac {

/// Reciprocal-condition-number floor below which the FIM is treated as
/// rank deficient (downstream LMIs need a strictly invertible J_p).
inline constexpr double kFimRcondFloor = 1e-10;

/// Location Fisher information and, when J_p is invertible, the CRB tr(J_p^-1).
struct FisherInfo {
  Mat3 matrix = Mat3::Zero();
  std::optional<double> crb;
};

/// Per-UAV information weight c_k (1/m^2) and complex gain alpha_k = h_k^H w_k.
/// c_k = 8 pi^2 beta^2 / (c^2 N0) * P_s_k * |alpha_k|^2, linear in P_s_k.
struct SensingGain {
  Eigen::VectorXd coeff;
  Eigen::VectorXcd alpha;
};

/// Angular projector of the ToA gradient, written out entry by entry;
/// numerically equal to d d^T for the unit direction d.
Mat3 psi(const Aod& angles);

SensingGain sensing_gain(const Scenario& scenario, const Eigen::VectorXd& sensing_power);

/// c_k for unit sensing power; fim() is this weighted by P_s.
Eigen::VectorXd fim_coefficients(const Scenario& scenario);

/// J_p = sum_k c_k Psi(theta_k), with the estimated channel in |h_k^H w_k|^2.
FisherInfo fim(const Scenario& scenario, const Eigen::VectorXd& sensing_power);

/// Same matrix assembled through the full delay/gain parameter chain
/// (per-link blocks, transform matrix, Schur complement). Serves as the
/// independent cross-check of fim().
Mat3 fim_appendix_oracle(const Scenario& scenario, const Eigen::VectorXd& sensing_power);

/// tr(J_p^-1); throws rank_deficient_geometry, naming the deficient
/// direction, when the FIM is singular or ill conditioned.
double crb(const FisherInfo& info);

}  // namespace uavisac
