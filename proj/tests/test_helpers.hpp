#pragma once

#include <random>

#include "uavisac/geometry.hpp"
#include "uavisac/scenario.hpp"

namespace uavisac::testing {

/// Three UAVs on a ring at 100 m altitude over the UE estimate, 4x4 UPA at
/// half-wavelength pitch, matched beamformers. Mirrors the repo default
/// scenario file.
inline Scenario triangle_scenario() {
  Scenario s;
  s.ue_estimate = Vec3(0, 0, 0);
  s.wavelength = 0.1;
  s.effective_bandwidth = 1e6;
  s.noise_psd = 1e-12;
  s.lightspeed = 299792458.0;
  const double radius = 80.0;
  const double altitude = 100.0;
  for (int k = 0; k < 3; ++k) {
    const double angle = (90.0 + 120.0 * k) * std::numbers::pi / 180.0;
    s.uav_positions.emplace_back(radius * std::cos(angle), radius * std::sin(angle), altitude);
    s.antenna_offsets.push_back(upa_layout(4, 4, 0.05));
    s.phase_shifts.push_back(0.0);
  }
  set_matched_beamformers(s);
  return s;
}

/// Three single-antenna UAVs at distance 100 along the coordinate axes;
/// their directions toward the UE are orthonormal, so equal sensing powers
/// give J_p proportional to the identity.
inline Scenario orthogonal_scenario() {
  Scenario s;
  s.ue_estimate = Vec3(0, 0, 0);
  s.wavelength = 0.1;
  s.effective_bandwidth = 1e6;
  s.noise_psd = 1e-12;
  s.lightspeed = 3e8;
  for (int k = 0; k < 3; ++k) {
    Vec3 p = Vec3::Zero();
    p(k) = 100.0;
    s.uav_positions.push_back(p);
    s.antenna_offsets.push_back(upa_layout(1, 1, 0.05));
    s.phase_shifts.push_back(0.0);
  }
  set_matched_beamformers(s);
  return s;
}

/// Randomized well-posed scenario for property tests.
inline Scenario random_scenario(std::mt19937_64& eng, int max_uavs = 5) {
  std::uniform_int_distribution<int> kdist(1, max_uavs);
  std::uniform_real_distribution<double> pos(-200.0, 200.0);
  std::uniform_real_distribution<double> alt(30.0, 300.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Scenario s;
  s.ue_estimate = Vec3(pos(eng) * 0.1, pos(eng) * 0.1, 0.0);
  s.wavelength = 0.05 + 0.2 * unit(eng);
  s.effective_bandwidth = 1e5 + 9e5 * unit(eng);
  s.noise_psd = 1e-13 + 1e-12 * unit(eng);
  s.lightspeed = 299792458.0;
  const int k_count = kdist(eng);
  std::uniform_int_distribution<int> rows(1, 3);
  for (int k = 0; k < k_count; ++k) {
    s.uav_positions.emplace_back(pos(eng), pos(eng), alt(eng));
    const int r = rows(eng), c = rows(eng);
    s.antenna_offsets.push_back(upa_layout(r, c, 0.5 * s.wavelength));
    s.phase_shifts.push_back(2.0 * std::numbers::pi * (unit(eng) - 0.5));
  }
  set_matched_beamformers(s);
  // half the time, replace matched beamformers with random unit vectors
  if (unit(eng) < 0.5) {
    for (auto& w : s.beamformers) {
      for (Eigen::Index m = 0; m < w.size(); ++m) {
        w(m) = std::complex<double>(unit(eng) - 0.5, unit(eng) - 0.5);
      }
      if (w.norm() == 0.0) w(0) = 1.0;
      w /= w.norm();
    }
  }
  return s;
}

}  // namespace uavisac::testing
