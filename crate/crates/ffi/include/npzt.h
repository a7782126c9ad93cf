#ifndef NPZT_H
#define NPZT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum NpztRegime {
  NPZT_REGIME_ROBUST = 0,
  NPZT_REGIME_MARGINAL = 1,
  NPZT_REGIME_RESTRICTIVE = 2,
} NpztRegime;

typedef enum NpztStatus {
  NPZT_STATUS_OK = 0,
  NPZT_STATUS_INVALID_ARGUMENT = 1,
  NPZT_STATUS_NULL_POINTER = 2,
  NPZT_STATUS_IO = 3,
  // Malformed parameter file or grid data.
  NPZT_STATUS_SCHEMA = 4,
  NPZT_STATUS_NUMERICAL = 5,
  // The cell is ice-covered and has no stability analysis.
  NPZT_STATUS_ICE = 6,
  // A Rust panic was caught at the boundary.
  NPZT_STATUS_PANIC = 7,
} NpztStatus;

typedef enum NpztTransition {
  NPZT_TRANSITION_STABLE_VIABILITY = 0,
  NPZT_TRANSITION_STABLE_RESTRICTION = 1,
  NPZT_TRANSITION_HABITAT_EXPANSION = 2,
  NPZT_TRANSITION_HABITAT_CONTRACTION = 3,
  NPZT_TRANSITION_ICE_FREE_VIABILITY = 4,
  NPZT_TRANSITION_ICE_FREE_RESTRICTION = 5,
  // Ice-covered at the end epoch.
  NPZT_TRANSITION_EXCLUDED = 6,
} NpztTransition;

// One grid cell with fitted seasonal forcing.
typedef struct NpztCell NpztCell;

// Parsed parameter file.
typedef struct NpztParams NpztParams;

typedef struct NpztTrajectory NpztTrajectory;

// Stability of the extinction state for one cell.
typedef struct NpztStabilityReport {
  // Invasion growth rate, per day.
  double lambda_p;
  double rho_p;
  double rho_z;
  double gain;
  double loss;
  double gamma_crit;
  // Inventory the exponent was evaluated at.
  double c0;
} NpztStabilityReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *npzt_version(void);

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into the library on this thread.
const char *npzt_last_error(void);

// Read a TOML parameter file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum NpztStatus npzt_params_load(const char *path, struct NpztParams **out);

// Parse parameters from TOML text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum NpztStatus npzt_params_from_str(const char *text, struct NpztParams **out);

// Inventory from the file, or twice the nutrient half-saturation.
//
// # Safety
// `params` must come from this library; `out` must be valid.
enum NpztStatus npzt_params_c0(const struct NpztParams *params, double *out);

// # Safety
// `params` must come from this library and not be used afterwards.
void npzt_params_free(struct NpztParams *params);

// Fit a cell from twelve monthly SSTs (°C) and mixed-layer depths (m).
// Ice-covered cells are created but report [`NpztStatus::Ice`] when
// analyzed.
//
// # Safety
// `sst` and `mld` must each point to 12 doubles; `out` must be valid.
enum NpztStatus npzt_cell_new(const struct NpztParams *params,
                              double latitude,
                              const double *sst,
                              const double *mld,
                              struct NpztCell **out);

// # Safety
// `cell` must come from this library; `out` must be valid.
enum NpztStatus npzt_cell_is_ice(const struct NpztCell *cell, bool *out);

// # Safety
// `cell` must come from this library and not be used afterwards.
void npzt_cell_free(struct NpztCell *cell);

// Stability report at inventory `c0`; pass a non-positive or NaN `c0` for
// the parameter file's value.
//
// # Safety
// Handles must come from this library; `out` must be valid.
enum NpztStatus npzt_cell_stability(const struct NpztCell *cell,
                                    const struct NpztParams *params,
                                    double c0,
                                    struct NpztStabilityReport *out);

// Integrate the ecosystem for `years` periods from `(n, p, z)`, sampling
// every `stride` days.
//
// # Safety
// Handles must come from this library; `out` must be valid.
enum NpztStatus npzt_simulate(const struct NpztCell *cell,
                              const struct NpztParams *params,
                              double n,
                              double p,
                              double z,
                              uint32_t years,
                              double stride,
                              struct NpztTrajectory **out);

// Number of samples, or 0 for a null handle.
//
// # Safety
// `traj` must be null or come from this library.
uintptr_t npzt_trajectory_len(const struct NpztTrajectory *traj);

// Copy samples into caller buffers: `times[len]` and row-major
// `states[3 * len]` as N, P, Z. `capacity` is the number of samples the
// buffers hold and must be at least the trajectory length.
//
// # Safety
// The buffers must be valid for the stated capacity.
enum NpztStatus npzt_trajectory_copy(const struct NpztTrajectory *traj,
                                     double *times,
                                     double *states,
                                     uintptr_t capacity);

// # Safety
// `traj` must come from this library and not be used afterwards.
void npzt_trajectory_free(struct NpztTrajectory *traj);

// # Safety
// `out` must be valid.
enum NpztStatus npzt_classify_regime(double gamma_crit, enum NpztRegime *out);

// Habitat transition between two epochs. The `gamma` of an ice-covered
// epoch is ignored.
//
// # Safety
// `out` must be valid.
enum NpztStatus npzt_classify_transition(bool start_ice,
                                         double start_gamma,
                                         bool end_ice,
                                         double end_gamma,
                                         enum NpztTransition *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NPZT_H */
