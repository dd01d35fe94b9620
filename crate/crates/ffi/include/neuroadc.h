#ifndef NEUROADC_H
#define NEUROADC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NadcStatus {
  NADC_STATUS_OK = 0,
  NADC_STATUS_NULL_POINTER = 1,
  NADC_STATUS_INVALID_ARGUMENT = 2,
  NADC_STATUS_PARSE = 3,
  NADC_STATUS_IO = 4,
  NADC_STATUS_CALIBRATION = 5,
  NADC_STATUS_DEGENERATE = 6,
  NADC_STATUS_RUNTIME = 7,
  NADC_STATUS_OUT_OF_RANGE = 8,
  NADC_STATUS_PANIC = 9,
} NadcStatus;

/**
 * Opaque experiment configuration.
 */
typedef struct NadcConfig NadcConfig;

/**
 * Opaque simulation result.
 */
typedef struct NadcTrace NadcTrace;

/**
 * One output spike.
 */
typedef struct NadcSpike {
  uint64_t step;
  double time_seconds;
  size_t row;
  size_t col;
  size_t id;
} NadcSpike;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message on this thread, or null if the last call succeeded.
 */
const char *nadc_last_error(void);

/**
 * Library defaults (7x30 array, sawtooth input).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NadcStatus nadc_config_default(struct NadcConfig **out);

/**
 * `paper-sine-50` or `paper-ramp-10`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NadcStatus nadc_config_from_preset(const char *name, struct NadcConfig **out);

/**
 * Loads a config file over the library defaults.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NadcStatus nadc_config_from_file(const char *path, struct NadcConfig **out);

/**
 * Parses config text over the library defaults.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NadcStatus nadc_config_from_str(const char *text, struct NadcConfig **out);

/**
 * Renders the config as text. Free the result with [`nadc_string_free`].
 *
 * # Safety
 * `config` must come from this library; `out` must be a valid pointer.
 */
enum NadcStatus nadc_config_render(const struct NadcConfig *config, char **out);

/**
 * # Safety
 * `s` must be null or come from [`nadc_config_render`].
 */
void nadc_string_free(char *s);

/**
 * # Safety
 * `config` must be null or come from this library, and not be used afterwards.
 */
void nadc_config_free(struct NadcConfig *config);

/**
 * # Safety
 * `config` must come from this library.
 */
enum NadcStatus nadc_config_set_seed(struct NadcConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must come from this library.
 */
enum NadcStatus nadc_config_set_duration(struct NadcConfig *config, uint64_t steps);

/**
 * Replaces the input waveform with a constant current.
 *
 * # Safety
 * `config` must come from this library.
 */
enum NadcStatus nadc_config_set_constant_input(struct NadcConfig *config, double amps);

/**
 * # Safety
 * `config` must come from this library.
 */
enum NadcStatus nadc_config_set_inhibition(struct NadcConfig *config, bool enabled);

/**
 * # Safety
 * `config` must come from this library.
 */
enum NadcStatus nadc_config_set_charge_gain(struct NadcConfig *config, double charge_gain);

/**
 * # Safety
 * `config` must come from this library; `out` must be a valid pointer.
 */
enum NadcStatus nadc_config_n_neurons(const struct NadcConfig *config, size_t *out);

/**
 * Simulates the configured run.
 *
 * # Safety
 * `config` must come from this library; `out` must be a valid pointer.
 */
enum NadcStatus nadc_run(const struct NadcConfig *config, struct NadcTrace **out);

/**
 * # Safety
 * `trace` must be null or come from [`nadc_run`], and not be used afterwards.
 */
void nadc_trace_free(struct NadcTrace *trace);

/**
 * # Safety
 * `trace` must come from [`nadc_run`]; `out` must be a valid pointer.
 */
enum NadcStatus nadc_trace_spike_count(const struct NadcTrace *trace, size_t *out);

/**
 * # Safety
 * `trace` must come from [`nadc_run`]; `out` must be a valid pointer.
 */
enum NadcStatus nadc_trace_spike(const struct NadcTrace *trace,
                                 size_t index,
                                 struct NadcSpike *out);

/**
 * Inter-spike-interval statistics of the aggregate spike train.
 *
 * # Safety
 * `trace` must come from [`nadc_run`]; the outputs must be valid pointers.
 */
enum NadcStatus nadc_trace_decoherence(const struct NadcTrace *trace,
                                       double *isi_cv,
                                       double *burst_fraction);

/**
 * Runs the configuration and returns the held-out low-pass reconstruction error.
 *
 * # Safety
 * `config` must come from this library; `rms_pct` must be a valid pointer.
 */
enum NadcStatus nadc_reconstruct_rms(const struct NadcConfig *config, double *rms_pct);

/**
 * Repeats the reconstruction with seeds `seed..seed + n_trials`.
 * `per_trial` may be null; otherwise it must hold `n_trials` doubles.
 *
 * # Safety
 * Pointers must be valid as described.
 */
enum NadcStatus nadc_monte_carlo(const struct NadcConfig *config,
                                 size_t n_trials,
                                 double *mean_pct,
                                 double *std_pct,
                                 double *per_trial);

/**
 * Finds the charge gain giving `target_rate` spikes per second. The config
 * is not modified.
 *
 * # Safety
 * `config` must come from this library; `out` must be a valid pointer.
 */
enum NadcStatus nadc_calibrate_charge_gain(const struct NadcConfig *config,
                                           double target_rate,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEUROADC_H */
