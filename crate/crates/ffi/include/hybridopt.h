#ifndef HYBRIDOPT_H
#define HYBRIDOPT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HoStatus {
  HO_STATUS_OK = 0,
  HO_STATUS_NULL_POINTER = 1,
  HO_STATUS_INVALID_ARGUMENT = 2,
  HO_STATUS_UNKNOWN_FUNCTION = 3,
  HO_STATUS_EVALUATION = 4,
  HO_STATUS_NUMERICAL = 5,
  HO_STATUS_SERIALIZATION = 6,
  HO_STATUS_BUFFER_TOO_SMALL = 7,
  HO_STATUS_NO_DATA = 8,
  HO_STATUS_PANIC = 9,
} HoStatus;

/**
 * Bayesian optimizer over a box.
 */
typedef struct HoBoState HoBoState;

/**
 * Hybrid bandit + Bayesian optimizer bound to one objective.
 */
typedef struct HoHybrid HoHybrid;

/**
 * Objective callback: evaluate at `discrete[0..n_discrete]`,
 * `continuous[0..n_continuous]`, store the value in `*value` and return 0,
 * or return nonzero to signal failure.
 */
typedef int (*HoObjectiveFn)(void *user_data,
                             const double *discrete,
                             size_t n_discrete,
                             const double *continuous,
                             size_t n_continuous,
                             double *value);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ho_last_error_message(char *buf, size_t len);

/**
 * Create an optimizer over `[lower[i], upper[i]]` for `dim` coordinates.
 *
 * # Safety
 * `lower` and `upper` must point to `dim` doubles; `out` must be writable.
 */
enum HoStatus ho_bo_new(size_t dim,
                        const double *lower,
                        const double *upper,
                        uint64_t seed,
                        struct HoBoState **out);

/**
 * Write the next point to evaluate into `x` (`dim` doubles).
 *
 * # Safety
 * `state` must come from this library; `x` must point to `dim` doubles.
 */
enum HoStatus ho_bo_suggest(struct HoBoState *state, double *x, size_t dim);

/**
 * Report the objective value `y` at `x`.
 *
 * # Safety
 * `state` must come from this library; `x` must point to `dim` doubles.
 */
enum HoStatus ho_bo_observe(struct HoBoState *state, const double *x, size_t dim, double y);

/**
 * Best observation so far; `NoData` before the first observation.
 *
 * # Safety
 * `state` must come from this library; `x` must point to `dim` doubles and
 * `y` be writable.
 */
enum HoStatus ho_bo_best(struct HoBoState *state, double *x, size_t dim, double *y);

/**
 * Serialize the optimizer into `buf`. `*written` receives the byte count
 * needed; if `cap` is too small nothing is copied and `BufferTooSmall` is
 * returned, so a call with `cap == 0` queries the size.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes; `written` must be writable.
 */
enum HoStatus ho_bo_serialize(const struct HoBoState *state,
                              uint8_t *buf,
                              size_t cap,
                              size_t *written);

/**
 * Rebuild an optimizer from bytes produced by [`ho_bo_serialize`].
 *
 * # Safety
 * `bytes` must point to `len` bytes; `out` must be writable.
 */
enum HoStatus ho_bo_deserialize(const uint8_t *bytes, size_t len, struct HoBoState **out);

/**
 * # Safety
 * `state` must be null or come from this library and not be used afterwards.
 */
void ho_bo_free(struct HoBoState *state);

/**
 * Hybrid optimizer over a built-in objective (`"shekel"`, `"composition"`
 * or `"sine_permutation"`), with `n` continuous steps per visited arm.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum HoStatus ho_hybrid_new_synthetic(const char *name,
                                      size_t n,
                                      double alpha,
                                      uint64_t seed,
                                      struct HoHybrid **out);

/**
 * Hybrid optimizer over a caller-supplied objective.
 *
 * Discrete variable `i` takes the `domain_sizes[i]` values stored
 * consecutively in `domains` (strictly increasing); continuous variable `j`
 * ranges over `[lower[j], upper[j]]`.
 *
 * # Safety
 * Array arguments must hold the stated number of elements; `callback` must
 * stay valid, and `user_data` usable by it, until the handle is freed.
 */
enum HoStatus ho_hybrid_new_callback(size_t n_discrete,
                                     const size_t *domain_sizes,
                                     const double *domains,
                                     size_t n_continuous,
                                     const double *lower,
                                     const double *upper,
                                     HoObjectiveFn callback,
                                     void *user_data,
                                     size_t n,
                                     double alpha,
                                     uint64_t seed,
                                     struct HoHybrid **out);

/**
 * Number of discrete and continuous variables.
 *
 * # Safety
 * `h` must come from this library; outputs must be writable.
 */
enum HoStatus ho_hybrid_dims(struct HoHybrid *h, size_t *n_discrete, size_t *n_continuous);

/**
 * Run one iteration; `*best` (if non-null) receives the best value so far.
 *
 * # Safety
 * `h` must come from this library; `best` must be null or writable.
 */
enum HoStatus ho_hybrid_step(struct HoHybrid *h, double *best);

/**
 * Best point found so far; `NoData` before the first step.
 *
 * # Safety
 * `h` must come from this library; `discrete`/`continuous` must hold the
 * counts reported by [`ho_hybrid_dims`]; `value` must be writable.
 */
enum HoStatus ho_hybrid_best(struct HoHybrid *h,
                             double *discrete,
                             size_t n_discrete,
                             double *continuous,
                             size_t n_continuous,
                             double *value);

/**
 * Completed iterations and objective evaluations.
 *
 * # Safety
 * `h` must come from this library; outputs must be writable.
 */
enum HoStatus ho_hybrid_counts(struct HoHybrid *h, size_t *iterations, size_t *evaluations);

/**
 * # Safety
 * `h` must be null or come from this library and not be used afterwards.
 */
void ho_hybrid_free(struct HoHybrid *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYBRIDOPT_H */
