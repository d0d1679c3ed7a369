#ifndef SUPERRAD_H
#define SUPERRAD_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_PARAMETER = 2,
  SR_STATUS_MINIMUM_SEPARATION_VIOLATED = 3,
  SR_STATUS_DEGENERATE_INITIAL_STATE = 4,
  SR_STATUS_NONPOSITIVE_GAMMA = 5,
  SR_STATUS_STEP_SIZE_TOO_LARGE = 6,
  SR_STATUS_HISTORY_UNDERFLOW = 7,
  SR_STATUS_NO_FIXED_POINT_IN_GAIN_REGIME = 8,
  SR_STATUS_EMPTY_SERIES = 9,
  SR_STATUS_NOT_STATIONARY = 10,
  SR_STATUS_NON_FINITE = 11,
  SR_STATUS_CONFIG_ERROR = 12,
  SR_STATUS_INDEX_OUT_OF_RANGE = 13,
  SR_STATUS_PANIC = 14,
} SrStatus;

/**
 * Opaque atom ensemble.
 */
typedef struct SrEnsemble SrEnsemble;

/**
 * Opaque sampled trajectory.
 */
typedef struct SrSeries SrSeries;

/**
 * Per-atom parameters. Frequencies in units of the radiative width, lengths
 * as `k0 r`.
 */
typedef struct SrAtomParams {
  double omega0;
  double gamma1;
  double gamma_s;
  double u0_re;
  double u0_im;
  double s0;
  double zeta;
  double r_min;
} SrAtomParams;

typedef struct SrCouplings {
  double g;
  double delta_l;
  double g_relative_spread;
  /**
   * Valid only when `has_alpha_c` is nonzero.
   */
  double alpha_c;
  int32_t has_alpha_c;
} SrCouplings;

typedef struct SrFixedPoint {
  double s_star;
  double w_star;
  double eta_infinity;
  /**
   * 0 gain clamped, 1 field dominated, 2 incoherent.
   */
  int32_t kind;
  int32_t stable;
  int32_t regime_mismatch;
} SrFixedPoint;

typedef struct SrAveragedOptions {
  double dt;
  double t_end;
  double output_dt;
  double max_ds;
} SrAveragedOptions;

typedef struct SrAveragedParams {
  double g;
  double alpha;
  double gamma1;
  double zeta;
  double w0;
  double s0;
} SrAveragedParams;

typedef struct SrSample {
  double t;
  double s_mean;
  double w_mean;
  double eta;
  double intensity;
} SrSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sr_last_error_message(void);

/**
 * Library defaults for [`SrAtomParams`].
 */
struct SrAtomParams sr_atom_params_default(void);

/**
 * Builds an ensemble from `n` positions stored as `x0 y0 z0 x1 ...`.
 */
enum SrStatus sr_ensemble_new(const double *positions,
                              uintptr_t n,
                              const struct SrAtomParams *params,
                              struct SrEnsemble **out);

void sr_ensemble_free(struct SrEnsemble *ensemble);

uintptr_t sr_ensemble_len(const struct SrEnsemble *ensemble);

enum SrStatus sr_ensemble_couplings(const struct SrEnsemble *ensemble, struct SrCouplings *out);

enum SrStatus sr_critical_alpha(double g, double u0_re, double u0_im, double s0, double *out);

enum SrStatus sr_stationary_point(double g,
                                  double alpha,
                                  double gamma1,
                                  double zeta,
                                  struct SrFixedPoint *out);

struct SrAveragedOptions sr_averaged_options_default(void);

enum SrStatus sr_integrate_averaged(const struct SrAveragedParams *params,
                                    const struct SrAveragedOptions *options,
                                    struct SrSeries **out);

/**
 * Field-free integration of the coupled Bloch equations.
 * `retardation`: 0 none, 1 propagation phase, 2 full delay.
 */
enum SrStatus sr_integrate_direct(const struct SrEnsemble *ensemble,
                                  int32_t retardation,
                                  double dt,
                                  double t_end,
                                  uintptr_t output_every,
                                  struct SrSeries **out);

uintptr_t sr_series_len(const struct SrSeries *series);

enum SrStatus sr_series_sample(const struct SrSeries *series,
                               uintptr_t index,
                               struct SrSample *out);

void sr_series_free(struct SrSeries *series);

/**
 * Runs `simulate` on configuration text. On success `*summary_json` and
 * `*timeseries_csv` receive strings to be released with [`sr_string_free`].
 */
enum SrStatus sr_simulate_config(const char *config_text,
                                 char **summary_json,
                                 char **timeseries_csv);

/**
 * Runs `couplings` on configuration text; `*json` is released with
 * [`sr_string_free`].
 */
enum SrStatus sr_couplings_config(const char *config_text, char **json);

void sr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERRAD_H */
