/* uavisac: robust communication/sensing power allocation for multi-UAV
 * ISAC systems, exposed as a C shared-library API over opaque handles.
 *
 * Conventions:
 *   - All functions returning uavisac_status report UAVISAC_OK on success.
 *   - On failure, uavisac_last_error() returns a thread-local message that
 *     stays valid until the next failing call on the same thread.
 *   - Handles are created by *_from_* / uavisac_solve and released with the
 *     matching *_free; freeing NULL is a no-op.
 */

#ifndef UAVISAC_H
#define UAVISAC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct uavisac_scenario uavisac_scenario;
typedef struct uavisac_result uavisac_result;

typedef enum uavisac_status {
  UAVISAC_OK = 0,
  UAVISAC_ERR_ARGUMENT = 1,
  UAVISAC_ERR_SCHEMA = 2,     /* scenario file violates the documented schema */
  UAVISAC_ERR_INFEASIBLE = 3, /* geometry or budget cannot meet the constraints */
  UAVISAC_ERR_NUMERICAL = 4,  /* solver failure */
  UAVISAC_ERR_IO = 5
} uavisac_status;

typedef enum uavisac_scheme {
  UAVISAC_SCHEME_NONROBUST = 0,
  UAVISAC_SCHEME_SAO = 1,
  UAVISAC_SCHEME_BISCA = 2,
  UAVISAC_SCHEME_CVARAO = 3
} uavisac_scheme;

const char* uavisac_version(void);
const char* uavisac_last_error(void);

/* -1 when the name is unknown (nonrobust | s-ao | bi-sca | cvar-ao). */
int uavisac_scheme_from_name(const char* name);
const char* uavisac_scheme_name(int scheme);

/* ---- scenarios ---------------------------------------------------- */

uavisac_status uavisac_scenario_from_file(const char* path, uavisac_scenario** out);
uavisac_status uavisac_scenario_from_json(const char* text, uavisac_scenario** out);
void uavisac_scenario_free(uavisac_scenario* scenario);

int uavisac_scenario_uav_count(const uavisac_scenario* scenario);
/* Scheme declared in the file's allocator block. */
int uavisac_scenario_scheme(const uavisac_scenario* scenario);
double uavisac_scenario_rate_floor(const uavisac_scenario* scenario);
double uavisac_scenario_total_power(const uavisac_scenario* scenario);
/* NaN when the robustness block does not carry the field. */
double uavisac_scenario_delta(const uavisac_scenario* scenario);
double uavisac_scenario_p_out(const uavisac_scenario* scenario);
/* "ellipsoid" | "gaussian" | "arbitrary" (storage owned by the handle). */
const char* uavisac_scenario_robustness_model(const uavisac_scenario* scenario);

/* Copy with one of rate_floor | total_power | delta | p_out replaced. */
uavisac_status uavisac_scenario_override(const uavisac_scenario* scenario,
                                         const char* parameter, double value,
                                         uavisac_scenario** out);

/* Monte-Carlo block accessors; samples is 0 when the block is absent. */
int uavisac_scenario_mc_samples(const uavisac_scenario* scenario);
uint64_t uavisac_scenario_mc_seed(const uavisac_scenario* scenario);
int uavisac_scenario_mc_family_count(const uavisac_scenario* scenario);
const char* uavisac_scenario_mc_family(const uavisac_scenario* scenario, int index);

/* Sweep block accessors; point count is 0 when the block is absent. */
int uavisac_scenario_sweep_points(const uavisac_scenario* scenario);
const char* uavisac_scenario_sweep_parameter(const uavisac_scenario* scenario);
uavisac_status uavisac_scenario_sweep_grid(const uavisac_scenario* scenario, double* grid,
                                           size_t capacity);

/* ---- solving ------------------------------------------------------ */

/* scheme: a uavisac_scheme value, or -1 for the file's allocator.scheme. */
uavisac_status uavisac_solve(const uavisac_scenario* scenario, int scheme,
                             uavisac_result** out);
void uavisac_result_free(uavisac_result* result);

double uavisac_result_crb(const uavisac_result* result);
int uavisac_result_iterations(const uavisac_result* result);
/* 1 when the run stopped on the tolerance before the iteration cap. */
int uavisac_result_converged(const uavisac_result* result);
double uavisac_result_total_power(const uavisac_result* result);
/* Objective trace tr(J_p^-1) after iteration `iter` (0-based). */
double uavisac_result_objective_at(const uavisac_result* result, int iter);
uavisac_status uavisac_result_powers(const uavisac_result* result, double* sensing,
                                     double* comm, size_t capacity);

/* ---- empirical verification --------------------------------------- */

/* Outage fractions Pr{rate < rate_floor} per UAV under `samples` draws of
 * the location error; family is one of
 *   "ellipsoid" | "gaussian" | "uniform-ellipsoid" | "rademacher-mixture".
 * The error shape is the FIM at the result's sensing powers; the bounded
 * ellipsoid family additionally needs robustness.delta in the scenario.
 * `halfwidth` (optional, may be NULL) receives the 95% binomial half-width
 * per UAV. */
uavisac_status uavisac_empirical_outage(const uavisac_scenario* scenario,
                                        const uavisac_result* result, const char* family,
                                        int samples, uint64_t seed, double* outage,
                                        double* halfwidth, size_t capacity);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* UAVISAC_H */
