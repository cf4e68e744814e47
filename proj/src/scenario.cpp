#include "uavisac/scenario.hpp"

#include <cmath>
#include <sstream>

#include "uavisac/geometry.hpp"

namespace uavisac {

void Scenario::validate() const {
  const int k_count = uav_count();
  if (k_count < 1) raise(ErrorCode::invalid_argument, "scenario: needs at least one UAV");
  if (static_cast<int>(antenna_offsets.size()) != k_count ||
      static_cast<int>(phase_shifts.size()) != k_count ||
      static_cast<int>(beamformers.size()) != k_count) {
    raise(ErrorCode::invalid_argument,
          "scenario: per-UAV arrays (offsets, phase_shifts, beamformers) must all have length K");
  }
  if (!(wavelength > 0.0) || !(effective_bandwidth > 0.0) || !(noise_psd > 0.0) ||
      !(lightspeed > 0.0)) {
    raise(ErrorCode::invalid_argument,
          "scenario: wavelength, effective_bandwidth, noise_psd, lightspeed must be positive");
  }
  for (int k = 0; k < k_count; ++k) {
    if (antenna_count(k) < 1) {
      std::ostringstream msg;
      msg << "scenario: UAV " << k << " has an empty antenna array";
      raise(ErrorCode::invalid_argument, msg.str());
    }
    if (beamformers[static_cast<size_t>(k)].size() != antenna_count(k)) {
      std::ostringstream msg;
      msg << "scenario: beamformer length mismatch for UAV " << k;
      raise(ErrorCode::invalid_argument, msg.str());
    }
    const double wn = beamformers[static_cast<size_t>(k)].norm();
    if (std::abs(wn - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "scenario: beamformer of UAV " << k << " must have unit norm, got " << wn;
      raise(ErrorCode::invalid_argument, msg.str());
    }
    if ((ue_estimate - uav_positions[static_cast<size_t>(k)]).norm() == 0.0) {
      std::ostringstream msg;
      msg << "scenario: UE estimate coincides with UAV " << k;
      raise(ErrorCode::invalid_geometry, msg.str());
    }
  }
}

void set_matched_beamformers(Scenario& scenario) {
  scenario.beamformers.resize(scenario.uav_positions.size());
  for (int k = 0; k < scenario.uav_count(); ++k) {
    const Aod angles = aod(scenario.uav_positions[static_cast<size_t>(k)], scenario.ue_estimate);
    Eigen::VectorXcd a = array_response(scenario.antenna_offsets[static_cast<size_t>(k)], angles,
                                        scenario.wavelength);
    scenario.beamformers[static_cast<size_t>(k)] = a / a.norm();
  }
}

}  // namespace uavisac
