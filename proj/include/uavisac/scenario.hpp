#pragma once

#include <Eigen/Dense>

#include <vector>

#include "uavisac/types.hpp"

namespace uavisac {

/// Immutable world description: UAV fleet, UE position estimate, radio
/// constants, and the fixed per-UAV beamformers. All lengths in meters,
/// powers in watts, PSD in W/Hz.
struct Scenario {
  std::vector<Vec3> uav_positions;               // p_k
  std::vector<Eigen::Matrix3Xd> antenna_offsets; // Q_k, element offsets relative to p_k
  Vec3 ue_estimate = Vec3::Zero();               // u_hat
  double wavelength = 0.1;                       // lambda
  double effective_bandwidth = 1e6;              // beta
  double noise_psd = 1e-12;                      // N0
  double lightspeed = 299792458.0;               // c
  std::vector<double> phase_shifts;              // psi_k
  std::vector<Eigen::VectorXcd> beamformers;     // w_k, unit norm

  int uav_count() const { return static_cast<int>(uav_positions.size()); }
  int antenna_count(int k) const {
    return static_cast<int>(antenna_offsets.at(static_cast<size_t>(k)).cols());
  }

  /// Checks the structural invariants (K >= 1, unit beamformers, positive
  /// radio constants, UE estimate distinct from every UAV). Throws on
  /// violation.
  void validate() const;
};

/// Fills beamformers with the conjugate match toward the UE estimate,
/// w_k = a_hat_k / sqrt(N_t), which maximizes |a_hat_k^H w_k|^2 = N_t.
void set_matched_beamformers(Scenario& scenario);

}  // namespace uavisac
