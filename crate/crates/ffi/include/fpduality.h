#ifndef FPDUALITY_H
#define FPDUALITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum FpdStatus {
  FPD_STATUS_OK = 0,
  FPD_STATUS_NULL_POINTER = 1,
  FPD_STATUS_INVALID_ARGUMENT = 2,
  FPD_STATUS_UNSUPPORTED = 3,
  FPD_STATUS_SIMULATION_FAILED = 4,
  FPD_STATUS_PANIC = 5,
} FpdStatus;

/**
 * Opaque first-passage ensemble.
 */
typedef struct FpdEnsemble FpdEnsemble;

/**
 * Opaque process description.
 */
typedef struct FpdProcess FpdProcess;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 *
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *fpd_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fpd_version(void);

/**
 * Creates a process. `sign` is `+1` (outward) or `-1` (inward). For `d = 1`
 * the target must be `a = 0`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum FpdStatus fpd_process_new(uint32_t dimension,
                               double diffusion,
                               double drift_strength,
                               int32_t sign,
                               double target_radius,
                               double start_radius,
                               struct FpdProcess **out);

/**
 * Releases a process. Null is ignored.
 *
 * # Safety
 * `process` must come from [`fpd_process_new`] and not be used afterwards.
 */
void fpd_process_free(struct FpdProcess *process);

/**
 * Hitting factor `H` at the start radius (1 for inward drift).
 *
 * # Safety
 * `process` must be a live handle and `out` writable.
 */
enum FpdStatus fpd_hitting_probability(const struct FpdProcess *process, double *out);

/**
 * Probability that the target is ever reached from the start radius.
 *
 * # Safety
 * `process` must be a live handle and `out` writable.
 */
enum FpdStatus fpd_ever_hit_probability(const struct FpdProcess *process, double *out);

/**
 * Mean first-passage time, conditioned on hitting when `conditioned != 0`.
 *
 * An infinite mean sets `*out_is_infinite = 1` and `*out_value = INFINITY`.
 *
 * # Safety
 * `process` must be a live handle; both output pointers must be writable.
 */
enum FpdStatus fpd_mean_fpt(const struct FpdProcess *process,
                            int32_t conditioned,
                            double *out_value,
                            int32_t *out_is_infinite);

/**
 * Simulates `n_paths` paths. `r_escape <= 0` selects the default escape
 * radius; `threads == 0` uses the global pool. Results do not depend on
 * `threads`.
 *
 * # Safety
 * `process` must be a live handle and `out` writable.
 */
enum FpdStatus fpd_ensemble_run(const struct FpdProcess *process,
                                uint64_t n_paths,
                                double dt,
                                double t_max,
                                double r_escape,
                                uint64_t seed,
                                uint32_t threads,
                                struct FpdEnsemble **out);

/**
 * Releases an ensemble. Null is ignored.
 *
 * # Safety
 * `ensemble` must come from [`fpd_ensemble_run`] and not be used afterwards.
 */
void fpd_ensemble_free(struct FpdEnsemble *ensemble);

/**
 * # Safety
 * `ensemble` must be a live handle and `out` writable.
 */
enum FpdStatus fpd_ensemble_n_paths(const struct FpdEnsemble *ensemble, uint64_t *out);

/**
 * # Safety
 * `ensemble` must be a live handle and `out` writable.
 */
enum FpdStatus fpd_ensemble_n_hits(const struct FpdEnsemble *ensemble, uint64_t *out);

/**
 * Copies hit times, in path order, into `buf`.
 *
 * `*out_len` receives the number of hits. If `cap` is too small nothing is
 * copied and `FPD_STATUS_INVALID_ARGUMENT` is returned; `buf` may be null
 * when `cap == 0` to query the size.
 *
 * # Safety
 * `ensemble` must be a live handle, `buf` valid for `cap` writes, `out_len` writable.
 */
enum FpdStatus fpd_ensemble_hit_times(const struct FpdEnsemble *ensemble,
                                      double *buf,
                                      size_t cap,
                                      size_t *out_len);

/**
 * Two-sample KS test of the conditioned hit times of a `±` pair.
 *
 * # Safety
 * Both ensembles must be live handles; all output pointers writable.
 */
enum FpdStatus fpd_ks_duality(const struct FpdEnsemble *plus,
                              const struct FpdEnsemble *minus,
                              double alpha,
                              double *out_statistic,
                              double *out_critical,
                              int32_t *out_pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPDUALITY_H */
