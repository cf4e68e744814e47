#pragma once

#include <Eigen/Dense>

#include <vector>

#include "uavisac/scenario.hpp"
#include "uavisac/types.hpp"

namespace uavisac {

/// LoS channel estimate toward the estimated UE position.
/// Invariants: ||h_k|| = lambda/(4 pi d_k) * sqrt(N_t), gain_k in [0, N_t].
struct ChannelEstimate {
  std::vector<Eigen::VectorXcd> h;  // h_hat_k
  std::vector<double> distance;     // d_k = ||u_hat - p_k||
  std::vector<double> gain;         // g_k = |a_hat_k^H w_k|^2
};

/// h_hat_k = lambda e^{j psi_k} / (4 pi d_k) * a_hat_k with angles from
/// aod(p_k, u_hat).
ChannelEstimate channel_estimate(const Scenario& scenario);

/// CSI error for a location error `lse`: the steering vector stays at the
/// estimated angle, only the path loss moves.
Eigen::VectorXcd channel_error(const Scenario& scenario, int k, const Vec3& lse);

/// Achievable rate (bits/s/Hz) of UAV k for communication power `comm_power`
/// when the true UE sits at u_hat + lse.
double rate(const Scenario& scenario, int k, double comm_power, const Vec3& lse);

/// Same rate evaluated through h_hat + channel_error instead of the direct
/// distance form; agrees with rate() to floating precision.
double rate_via_channel(const Scenario& scenario, int k, double comm_power, const Vec3& lse);

}  // namespace uavisac
