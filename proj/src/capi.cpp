#include "uavisac.h"

#include <cmath>
#include <cstring>
#include <string>

#include "uavisac/allocators.hpp"
#include "uavisac/fisher.hpp"
#include "uavisac/montecarlo.hpp"
#include "uavisac/scenario_json.hpp"

struct uavisac_scenario {
  uavisac::ScenarioFile file;
};

struct uavisac_result {
  uavisac::AllocatorResult result;
};

namespace {

thread_local std::string g_last_error;

uavisac_status status_of(const uavisac::Error& err) {
  using uavisac::ErrorCode;
  switch (err.code()) {
    case ErrorCode::schema:
      return UAVISAC_ERR_SCHEMA;
    case ErrorCode::io:
      return UAVISAC_ERR_IO;
    case ErrorCode::budget_infeasible:
    case ErrorCode::geometry_infeasible:
    case ErrorCode::rank_deficient_geometry:
    case ErrorCode::invalid_geometry:
    case ErrorCode::solver_infeasible:
      return UAVISAC_ERR_INFEASIBLE;
    case ErrorCode::sca_infeasible_iterate:
    case ErrorCode::numerical_failure:
      return UAVISAC_ERR_NUMERICAL;
    case ErrorCode::invalid_argument:
      return UAVISAC_ERR_ARGUMENT;
  }
  return UAVISAC_ERR_NUMERICAL;
}

uavisac_status fail(uavisac_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
uavisac_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const uavisac::Error& err) {
    return fail(status_of(err), err.what());
  } catch (const std::exception& ex) {
    return fail(UAVISAC_ERR_NUMERICAL, ex.what());
  }
}

}  // namespace

extern "C" {

const char* uavisac_version(void) { return "1.0.0"; }

const char* uavisac_last_error(void) { return g_last_error.c_str(); }

int uavisac_scheme_from_name(const char* name) {
  if (name == nullptr) return -1;
  try {
    return static_cast<int>(uavisac::scheme_from_name(name));
  } catch (const uavisac::Error&) {
    return -1;
  }
}

const char* uavisac_scheme_name(int scheme) {
  if (scheme < 0 || scheme > 3) return "unknown";
  return uavisac::scheme_name(static_cast<uavisac::Scheme>(scheme));
}

uavisac_status uavisac_scenario_from_file(const char* path, uavisac_scenario** out) {
  if (path == nullptr || out == nullptr) return fail(UAVISAC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = new uavisac_scenario{uavisac::load_scenario_file(path)};
    *out = handle;
    return UAVISAC_OK;
  });
}

uavisac_status uavisac_scenario_from_json(const char* text, uavisac_scenario** out) {
  if (text == nullptr || out == nullptr) return fail(UAVISAC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto handle = new uavisac_scenario{uavisac::parse_scenario_json(text)};
    *out = handle;
    return UAVISAC_OK;
  });
}

void uavisac_scenario_free(uavisac_scenario* scenario) { delete scenario; }

int uavisac_scenario_uav_count(const uavisac_scenario* s) {
  return s ? s->file.scenario.uav_count() : 0;
}

int uavisac_scenario_scheme(const uavisac_scenario* s) {
  return s ? static_cast<int>(s->file.scheme) : -1;
}

double uavisac_scenario_rate_floor(const uavisac_scenario* s) {
  return s ? s->file.config.rate_floor : std::nan("");
}

double uavisac_scenario_total_power(const uavisac_scenario* s) {
  return s ? s->file.config.total_power : std::nan("");
}

double uavisac_scenario_delta(const uavisac_scenario* s) {
  if (s == nullptr || !s->file.robustness.delta) return std::nan("");
  return *s->file.robustness.delta;
}

double uavisac_scenario_p_out(const uavisac_scenario* s) {
  if (s == nullptr || !s->file.robustness.p_out) return std::nan("");
  return *s->file.robustness.p_out;
}

const char* uavisac_scenario_robustness_model(const uavisac_scenario* s) {
  return s ? s->file.robustness.model.c_str() : "";
}

uavisac_status uavisac_scenario_override(const uavisac_scenario* s, const char* parameter,
                                         double value, uavisac_scenario** out) {
  if (s == nullptr || parameter == nullptr || out == nullptr) {
    return fail(UAVISAC_ERR_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    auto handle = new uavisac_scenario{s->file};
    try {
      uavisac::apply_override(handle->file, parameter, value);
    } catch (...) {
      delete handle;
      throw;
    }
    *out = handle;
    return UAVISAC_OK;
  });
}

int uavisac_scenario_mc_samples(const uavisac_scenario* s) {
  return (s && s->file.montecarlo) ? s->file.montecarlo->samples : 0;
}

uint64_t uavisac_scenario_mc_seed(const uavisac_scenario* s) {
  return (s && s->file.montecarlo) ? s->file.montecarlo->seed : 0;
}

int uavisac_scenario_mc_family_count(const uavisac_scenario* s) {
  return (s && s->file.montecarlo) ? static_cast<int>(s->file.montecarlo->families.size()) : 0;
}

const char* uavisac_scenario_mc_family(const uavisac_scenario* s, int index) {
  if (s == nullptr || !s->file.montecarlo) return nullptr;
  const auto& families = s->file.montecarlo->families;
  if (index < 0 || index >= static_cast<int>(families.size())) return nullptr;
  return families[static_cast<size_t>(index)].c_str();
}

int uavisac_scenario_sweep_points(const uavisac_scenario* s) {
  return (s && s->file.sweep) ? static_cast<int>(s->file.sweep->grid.size()) : 0;
}

const char* uavisac_scenario_sweep_parameter(const uavisac_scenario* s) {
  return (s && s->file.sweep) ? s->file.sweep->parameter.c_str() : nullptr;
}

uavisac_status uavisac_scenario_sweep_grid(const uavisac_scenario* s, double* grid,
                                           size_t capacity) {
  if (s == nullptr || grid == nullptr) return fail(UAVISAC_ERR_ARGUMENT, "null argument");
  if (!s->file.sweep) return fail(UAVISAC_ERR_ARGUMENT, "scenario has no sweep block");
  const auto& g = s->file.sweep->grid;
  if (capacity < g.size()) return fail(UAVISAC_ERR_ARGUMENT, "grid buffer too small");
  std::memcpy(grid, g.data(), g.size() * sizeof(double));
  return UAVISAC_OK;
}

uavisac_status uavisac_solve(const uavisac_scenario* s, int scheme, uavisac_result** out) {
  if (s == nullptr || out == nullptr) return fail(UAVISAC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const uavisac::Scheme which =
        scheme < 0 ? s->file.scheme : static_cast<uavisac::Scheme>(scheme);
    if (scheme > 3) uavisac::raise(uavisac::ErrorCode::invalid_argument, "unknown scheme id");
    auto handle = new uavisac_result{uavisac::run_scheme(s->file, which)};
    *out = handle;
    return UAVISAC_OK;
  });
}

void uavisac_result_free(uavisac_result* result) { delete result; }

double uavisac_result_crb(const uavisac_result* r) { return r ? r->result.crb : std::nan(""); }

int uavisac_result_iterations(const uavisac_result* r) {
  return r ? static_cast<int>(r->result.trace.iterations.size()) : 0;
}

int uavisac_result_converged(const uavisac_result* r) {
  return (r && r->result.trace.converged) ? 1 : 0;
}

double uavisac_result_total_power(const uavisac_result* r) {
  return r ? r->result.allocation.total() : std::nan("");
}

double uavisac_result_objective_at(const uavisac_result* r, int iter) {
  if (r == nullptr || iter < 0 || iter >= static_cast<int>(r->result.trace.iterations.size())) {
    return std::nan("");
  }
  return r->result.trace.iterations[static_cast<size_t>(iter)].objective;
}

uavisac_status uavisac_result_powers(const uavisac_result* r, double* sensing, double* comm,
                                     size_t capacity) {
  if (r == nullptr || sensing == nullptr || comm == nullptr) {
    return fail(UAVISAC_ERR_ARGUMENT, "null argument");
  }
  const auto& alloc = r->result.allocation;
  if (capacity < static_cast<size_t>(alloc.sensing.size())) {
    return fail(UAVISAC_ERR_ARGUMENT, "power buffer too small");
  }
  for (Eigen::Index k = 0; k < alloc.sensing.size(); ++k) {
    sensing[k] = alloc.sensing(k);
    comm[k] = alloc.comm(k);
  }
  return UAVISAC_OK;
}

uavisac_status uavisac_empirical_outage(const uavisac_scenario* s, const uavisac_result* r,
                                        const char* family, int samples, uint64_t seed,
                                        double* outage, double* halfwidth, size_t capacity) {
  if (s == nullptr || r == nullptr || family == nullptr || outage == nullptr) {
    return fail(UAVISAC_ERR_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const int k_count = s->file.scenario.uav_count();
    if (capacity < static_cast<size_t>(k_count)) {
      uavisac::raise(uavisac::ErrorCode::invalid_argument, "outage buffer too small");
    }
    if (samples < 1) {
      uavisac::raise(uavisac::ErrorCode::invalid_argument, "samples must be >= 1");
    }
    const uavisac::LseFamily fam = uavisac::lse_family_from_name(family);
    const uavisac::Mat3 j = r->result.fisher.matrix;
    uavisac::LseSampler sampler = [&] {
      if (fam == uavisac::LseFamily::ellipsoid) {
        if (!s->file.robustness.delta) {
          uavisac::raise(uavisac::ErrorCode::schema,
                         "schema: robustness.delta: required by the ellipsoid family");
        }
        return uavisac::LseSampler::ellipsoid(j, *s->file.robustness.delta, seed);
      }
      return uavisac::LseSampler::arbitrary(j, fam, seed);
    }();
    const uavisac::OutageReport report = uavisac::empirical_outage(
        s->file.scenario, r->result.allocation, sampler.sample(samples),
        s->file.config.rate_floor);
    for (int k = 0; k < k_count; ++k) {
      outage[k] = report.fraction(k);
      if (halfwidth != nullptr) halfwidth[k] = report.halfwidth(k);
    }
    return UAVISAC_OK;
  });
}

}  // extern "C"
