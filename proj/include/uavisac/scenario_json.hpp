#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uavisac/allocators.hpp"
#include "uavisac/scenario.hpp"

namespace uavisac {

enum class Scheme { nonrobust, sao, bisca, cvarao };

Scheme scheme_from_name(std::string_view name);
const char* scheme_name(Scheme scheme);

struct RobustnessSpec {
  std::string model;  // "ellipsoid" | "gaussian" | "arbitrary"
  std::optional<double> delta;
  std::optional<double> p_out;
};

struct MonteCarloSpec {
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> families;
};

struct SweepSpec {
  std::string parameter;  // rate_floor | total_power | delta | p_out
  std::vector<double> grid;
};

/// Parsed scenario file: the world plus the run configuration blocks.
struct ScenarioFile {
  Scenario scenario;
  Scheme scheme = Scheme::nonrobust;
  AllocatorConfig config;
  RobustnessSpec robustness;
  std::optional<MonteCarloSpec> montecarlo;
  std::optional<SweepSpec> sweep;
};

/// Parses and validates; schema violations raise ErrorCode::schema naming
/// the offending key path (e.g. "radio.noise_psd").
ScenarioFile parse_scenario_json(const std::string& text);
ScenarioFile load_scenario_file(const std::string& path);

/// Applies a sweep override; parameter is one of rate_floor, total_power,
/// delta, p_out.
void apply_override(ScenarioFile& file, std::string_view parameter, double value);

/// delta for s-ao, p_out for bi-sca / cvar-ao; raises schema errors when the
/// robustness block lacks the needed field.
AllocatorResult run_scheme(const ScenarioFile& file, Scheme scheme);

}  // namespace uavisac
