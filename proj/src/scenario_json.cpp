#include "uavisac/scenario_json.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uavisac/geometry.hpp"
#include "uavisac/montecarlo.hpp"

namespace uavisac {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  raise(ErrorCode::schema, "schema: " + path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing key");
  return *it;
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) schema_error(path + "." + key, "expected a number");
  return v.get<double>();
}

double optional_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return obj.at(key).get<double>();
}

int require_int(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) schema_error(path + "." + key, "expected an integer");
  return v.get<int>();
}

Vec3 parse_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) schema_error(path, "expected an array of 3 numbers");
  for (const auto& x : v) {
    if (!x.is_number()) schema_error(path, "expected an array of 3 numbers");
  }
  return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

}  // namespace

Scheme scheme_from_name(std::string_view name) {
  if (name == "nonrobust") return Scheme::nonrobust;
  if (name == "s-ao") return Scheme::sao;
  if (name == "bi-sca") return Scheme::bisca;
  if (name == "cvar-ao") return Scheme::cvarao;
  raise(ErrorCode::invalid_argument,
        "unknown scheme '" + std::string(name) + "' (expected nonrobust|s-ao|bi-sca|cvar-ao)");
}

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::nonrobust: return "nonrobust";
    case Scheme::sao: return "s-ao";
    case Scheme::bisca: return "bi-sca";
    case Scheme::cvarao: return "cvar-ao";
  }
  return "unknown";
}

ScenarioFile parse_scenario_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    raise(ErrorCode::schema, std::string("schema: not valid JSON: ") + err.what());
  }
  if (!root.is_object()) raise(ErrorCode::schema, "schema: top level must be an object");

  ScenarioFile file;

  // radio
  const json& radio = require(root, "radio", "");
  file.scenario.wavelength = require_number(radio, "wavelength", "radio");
  file.scenario.effective_bandwidth = require_number(radio, "effective_bandwidth", "radio");
  file.scenario.noise_psd = require_number(radio, "noise_psd", "radio");
  file.scenario.lightspeed = optional_number(radio, "lightspeed", 299792458.0);

  // ue + uavs
  file.scenario.ue_estimate = parse_vec3(require(root, "ue_estimate", ""), "ue_estimate");
  const json& uavs = require(root, "uavs", "");
  if (!uavs.is_array() || uavs.empty()) schema_error("uavs", "expected a non-empty array");
  int k = 0;
  for (const auto& uav : uavs) {
    const std::string path = "uavs[" + std::to_string(k) + "]";
    file.scenario.uav_positions.push_back(parse_vec3(require(uav, "position", path), path + ".position"));
    const json& arr = require(uav, "array", path);
    const int rows = require_int(arr, "rows", path + ".array");
    const int cols = require_int(arr, "cols", path + ".array");
    const double spacing =
        optional_number(arr, "spacing", 0.5 * file.scenario.wavelength);
    if (rows < 1 || cols < 1) schema_error(path + ".array", "rows and cols must be >= 1");
    if (!(spacing > 0.0)) schema_error(path + ".array.spacing", "must be > 0");
    file.scenario.antenna_offsets.push_back(upa_layout(rows, cols, spacing));
    file.scenario.phase_shifts.push_back(optional_number(uav, "phase_shift", 0.0));
    ++k;
  }
  set_matched_beamformers(file.scenario);
  try {
    file.scenario.validate();
  } catch (const Error& err) {
    raise(ErrorCode::schema, std::string("schema: ") + err.what());
  }

  // allocator
  const json& alloc = require(root, "allocator", "");
  const json& scheme = require(alloc, "scheme", "allocator");
  if (!scheme.is_string()) schema_error("allocator.scheme", "expected a string");
  try {
    file.scheme = scheme_from_name(scheme.get<std::string>());
  } catch (const Error& err) {
    schema_error("allocator.scheme", err.what());
  }
  file.config.rate_floor = require_number(alloc, "rate_floor", "allocator");
  file.config.total_power = require_number(alloc, "total_power", "allocator");
  file.config.tolerance = optional_number(alloc, "tolerance", 1e-7);
  file.config.max_iters = static_cast<int>(optional_number(alloc, "max_iters", 30));
  if (alloc.contains("initial_sensing")) {
    const json& init = alloc.at("initial_sensing");
    if (!init.is_array() || init.size() != file.scenario.uav_positions.size()) {
      schema_error("allocator.initial_sensing", "expected an array of K numbers");
    }
    file.config.initial_sensing.resize(static_cast<Eigen::Index>(init.size()));
    for (Eigen::Index i = 0; i < file.config.initial_sensing.size(); ++i) {
      file.config.initial_sensing(i) = init[static_cast<size_t>(i)].get<double>();
    }
  }
  if (alloc.contains("paper_linearization")) {
    file.config.paper_linearization = alloc.at("paper_linearization").get<bool>();
  }
  if (alloc.contains("freeze_cvar_expansion")) {
    file.config.freeze_cvar_expansion = alloc.at("freeze_cvar_expansion").get<bool>();
  }
  file.config.solver_tolerance = optional_number(alloc, "solver_tolerance", 1e-9);
  try {
    file.config.validate(file.scenario.uav_count());
  } catch (const Error& err) {
    raise(ErrorCode::schema, std::string("schema: allocator: ") + err.what());
  }

  // robustness
  const json& robust = require(root, "robustness", "");
  const json& model = require(robust, "model", "robustness");
  if (!model.is_string()) schema_error("robustness.model", "expected a string");
  file.robustness.model = model.get<std::string>();
  if (file.robustness.model != "ellipsoid" && file.robustness.model != "gaussian" &&
      file.robustness.model != "arbitrary") {
    schema_error("robustness.model", "expected ellipsoid|gaussian|arbitrary");
  }
  if (robust.contains("delta")) file.robustness.delta = robust.at("delta").get<double>();
  if (robust.contains("p_out")) file.robustness.p_out = robust.at("p_out").get<double>();
  if (file.robustness.delta && !(*file.robustness.delta > 0.0)) {
    schema_error("robustness.delta", "must be > 0");
  }
  if (file.robustness.p_out &&
      !(*file.robustness.p_out > 0.0 && *file.robustness.p_out < 1.0)) {
    schema_error("robustness.p_out", "must lie in (0,1)");
  }
  if (file.robustness.model == "ellipsoid" && !file.robustness.delta) {
    schema_error("robustness.delta", "missing key (required by the ellipsoid model)");
  }
  if (file.robustness.model != "ellipsoid" && !file.robustness.p_out) {
    schema_error("robustness.p_out", "missing key (required by the chance-constrained models)");
  }

  // montecarlo (optional)
  if (root.contains("montecarlo")) {
    const json& mc = root.at("montecarlo");
    MonteCarloSpec spec;
    spec.samples = require_int(mc, "samples", "montecarlo");
    if (spec.samples < 1) schema_error("montecarlo.samples", "must be >= 1");
    spec.seed = static_cast<std::uint64_t>(require(mc, "seed", "montecarlo").get<std::uint64_t>());
    if (mc.contains("families")) {
      for (const auto& f : mc.at("families")) {
        const std::string name = f.get<std::string>();
        try {
          (void)lse_family_from_name(name);
        } catch (const Error& err) {
          schema_error("montecarlo.families", err.what());
        }
        spec.families.push_back(name);
      }
    } else {
      spec.families = {"gaussian", "uniform-ellipsoid", "rademacher-mixture"};
    }
    file.montecarlo = std::move(spec);
  }

  // sweep (optional)
  if (root.contains("sweep")) {
    const json& sw = root.at("sweep");
    SweepSpec spec;
    const json& param = require(sw, "parameter", "sweep");
    if (!param.is_string()) schema_error("sweep.parameter", "expected a string");
    spec.parameter = param.get<std::string>();
    if (spec.parameter != "rate_floor" && spec.parameter != "total_power" &&
        spec.parameter != "delta" && spec.parameter != "p_out") {
      schema_error("sweep.parameter", "expected rate_floor|total_power|delta|p_out");
    }
    const json& grid = require(sw, "grid", "sweep");
    if (!grid.is_array()) schema_error("sweep.grid", "expected an array of numbers");
    for (const auto& g : grid) spec.grid.push_back(g.get<double>());
    file.sweep = std::move(spec);
  }

  return file;
}

ScenarioFile load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io, "cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str());
}

void apply_override(ScenarioFile& file, std::string_view parameter, double value) {
  if (parameter == "rate_floor") {
    file.config.rate_floor = value;
  } else if (parameter == "total_power") {
    file.config.total_power = value;
  } else if (parameter == "delta") {
    file.robustness.delta = value;
  } else if (parameter == "p_out") {
    file.robustness.p_out = value;
  } else {
    raise(ErrorCode::invalid_argument,
          "unknown sweep parameter '" + std::string(parameter) +
              "' (expected rate_floor|total_power|delta|p_out)");
  }
}

AllocatorResult run_scheme(const ScenarioFile& file, Scheme scheme) {
  switch (scheme) {
    case Scheme::nonrobust:
      return solve_nonrobust(file.scenario, file.config);
    case Scheme::sao:
      if (!file.robustness.delta) {
        raise(ErrorCode::schema, "schema: robustness.delta: required by scheme s-ao");
      }
      return solve_sao(file.scenario, file.config, *file.robustness.delta);
    case Scheme::bisca:
      if (!file.robustness.p_out) {
        raise(ErrorCode::schema, "schema: robustness.p_out: required by scheme bi-sca");
      }
      return solve_bisca(file.scenario, file.config, *file.robustness.p_out);
    case Scheme::cvarao:
      if (!file.robustness.p_out) {
        raise(ErrorCode::schema, "schema: robustness.p_out: required by scheme cvar-ao");
      }
      return solve_cvarao(file.scenario, file.config, *file.robustness.p_out);
  }
  raise(ErrorCode::invalid_argument, "unknown scheme");
}

}  // namespace uavisac
