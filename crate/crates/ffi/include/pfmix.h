#ifndef PFMIX_H
#define PFMIX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PfmixStatus {
  PFMIX_STATUS_OK = 0,
  PFMIX_STATUS_NULL_POINTER = 1,
  PFMIX_STATUS_INVALID_STRING = 2,
  PFMIX_STATUS_INVALID_CONFIG = 3,
  PFMIX_STATUS_SOLVER_FAILURE = 4,
  PFMIX_STATUS_IO = 5,
  PFMIX_STATUS_OUT_OF_RANGE = 6,
  PFMIX_STATUS_PANIC = 7,
} PfmixStatus;

typedef enum PfmixScenario {
  PFMIX_SCENARIO_HANGING_BLOCK = 0,
  PFMIX_SCENARIO_SNEDDON = 1,
  PFMIX_SCENARIO_SNEDDON_LAYERED = 2,
  PFMIX_SCENARIO_SENT = 3,
} PfmixScenario;

typedef struct PfmixConfig PfmixConfig;

typedef struct PfmixRun PfmixRun;

/**
 * One report row. Values that were not computed are NaN, `n_as` is -1.
 */
typedef struct PfmixStatsRow {
  uint64_t step;
  uint64_t dofs;
  double avg_lin;
  double avg_cg;
  int64_t n_as;
  double cod_max;
  double tcv;
  double e_bulk;
  double e_crack;
  double u_y_point;
} PfmixStatsRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *pfmix_last_error(void);

/**
 * Default configuration of a benchmark scenario.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum PfmixStatus pfmix_config_new(enum PfmixScenario scenario, struct PfmixConfig **out);

/**
 * Parses a configuration from JSON (the format printed by
 * `pfmix solve --print-config`).
 *
 * # Safety
 * `json` must be a NUL-terminated string, `out` a valid handle pointer.
 */
enum PfmixStatus pfmix_config_from_json(const char *json, struct PfmixConfig **out);

/**
 * Serializes a configuration to JSON. Release the string with
 * [`pfmix_string_free`].
 *
 * # Safety
 * `cfg` must be a live handle, `out` a valid pointer.
 */
enum PfmixStatus pfmix_config_to_json(struct PfmixConfig *cfg, char **out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void pfmix_string_free(char *s);

/**
 * # Safety
 * `cfg` must come from this library or be null.
 */
void pfmix_config_free(struct PfmixConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum PfmixStatus pfmix_config_set_refines(struct PfmixConfig *cfg, uint32_t refines);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum PfmixStatus pfmix_config_set_steps(struct PfmixConfig *cfg, uint32_t steps);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum PfmixStatus pfmix_config_set_nu(struct PfmixConfig *cfg, double nu);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum PfmixStatus pfmix_config_set_kappa(struct PfmixConfig *cfg, double kappa);

/**
 * Crack pressure.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum PfmixStatus pfmix_config_set_rho(struct PfmixConfig *cfg, double rho);

/**
 * Runs the scenario to completion. A run that stops early because a step
 * failed still yields a handle; see [`pfmix_run_failure`].
 *
 * # Safety
 * `cfg` must be a live handle, `out` a valid pointer.
 */
enum PfmixStatus pfmix_run(struct PfmixConfig *cfg, struct PfmixRun **out);

/**
 * # Safety
 * `run` must come from this library or be null.
 */
void pfmix_run_free(struct PfmixRun *run);

/**
 * Number of report rows, or 0 for a null handle.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
size_t pfmix_run_num_rows(const struct PfmixRun *run);

/**
 * # Safety
 * `run` must be a live handle, `out` a valid pointer.
 */
enum PfmixStatus pfmix_run_row(const struct PfmixRun *run, size_t index, struct PfmixStatsRow *out);

/**
 * Message of the error that stopped the run, or null if all steps converged.
 * The pointer stays valid until the next call of this function on the
 * same thread.
 *
 * # Safety
 * `run` must be a live handle or null.
 */
const char *pfmix_run_failure(const struct PfmixRun *run);

/**
 * Writes `stats.csv`, `cod_profile.csv` and, if `vtk` is nonzero,
 * `fields.vtk` into `dir`.
 *
 * # Safety
 * `run` must be a live handle, `dir` a NUL-terminated string.
 */
enum PfmixStatus pfmix_run_write(const struct PfmixRun *run, const char *dir, int vtk);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PFMIX_H */
