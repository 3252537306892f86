#ifndef BOOSTLAB_H
#define BOOSTLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_ARGUMENT = 2,
  BL_STATUS_DIMENSION_MISMATCH = 3,
  BL_STATUS_PARSE = 4,
  BL_STATUS_PERFECT_SEPARATION = 5,
  BL_STATUS_NUMERICAL = 6,
  BL_STATUS_NOT_FOUND = 7,
  BL_STATUS_ORACLE_REFUSED = 8,
  BL_STATUS_INTERNAL = 9,
} BlStatus;

typedef enum {
  BL_VARIANT_PLAIN = 0,
  BL_VARIANT_SCALED = 1,
} BlVariant;

typedef enum {
  BL_RUN_STATUS_COMPLETED = 0,
  BL_RUN_STATUS_PERFECT_SEPARATION = 1,
  BL_RUN_STATUS_TARGET_REACHED = 2,
} BlRunStatus;

/**
 * Opaque decomposition.
 */
typedef struct BlDecomposition BlDecomposition;

/**
 * Opaque feature matrix.
 */
typedef struct BlMatrix BlMatrix;

/**
 * Opaque boosting trace.
 */
typedef struct BlTrace BlTrace;

/**
 * One boosting round. Optional fields are NaN when absent.
 */
typedef struct {
  size_t t;
  size_t j;
  double r;
  double delta;
  double alpha;
  double loss;
  double l1_norm;
  double scale;
  double loss_z;
  double loss_f;
} BlRound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *bl_last_error(void);

/**
 * Library version, a static string.
 */
const char *bl_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void bl_string_free(char *s);

/**
 * Builds a `rows x cols` matrix from row-major `entries` in `[-1, 1]`.
 *
 * # Safety
 * `entries` must point to `rows * cols` doubles; `out` must be writable.
 */
BlStatus bl_matrix_new(size_t rows, size_t cols, const double *entries, BlMatrix **out);

/**
 * Builds a matrix from a dataset name such as `three-example`,
 * `triangular:5` or `file:PATH`.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
BlStatus bl_matrix_from_dataset(const char *source, uint64_t seed, BlMatrix **out);

/**
 * Number of rows, or 0 for null.
 *
 * # Safety
 * `m` must be null or a live matrix handle.
 */
size_t bl_matrix_rows(const BlMatrix *m);

/**
 * Number of columns, or 0 for null.
 *
 * # Safety
 * `m` must be null or a live matrix handle.
 */
size_t bl_matrix_cols(const BlMatrix *m);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void bl_matrix_free(BlMatrix *m);

/**
 * Normalized exponential loss of `weights` (length `cols`).
 *
 * # Safety
 * `weights` must point to `cols` doubles; `out` must be writable.
 */
BlStatus bl_exp_loss(const BlMatrix *m, const double *weights, size_t len, double *out);

/**
 * Runs up to `rounds` rounds. `stop_loss` ends the run once the loss is at
 * most that value; pass NaN for no target. A run that halts on perfect
 * separation still returns `Ok` with a trace; check `bl_trace_status`.
 *
 * # Safety
 * `m` must be a live matrix handle and `out` writable.
 */
BlStatus bl_run(const BlMatrix *m,
                size_t rounds,
                BlVariant variant,
                double stop_loss,
                BlTrace **out);

/**
 * Rounds completed, or 0 for null.
 *
 * # Safety
 * `t` must be null or a live trace handle.
 */
size_t bl_trace_len(const BlTrace *t);

/**
 * # Safety
 * `t` must be a live trace handle and `out` writable.
 */
BlStatus bl_trace_status(const BlTrace *t, BlRunStatus *out);

/**
 * Loss after round `t` (`t = 0` is the initial loss).
 *
 * # Safety
 * `tr` must be a live trace handle and `out` writable.
 */
BlStatus bl_trace_loss(const BlTrace *tr, size_t t, double *out);

/**
 * Record of round `t`, `1 <= t <= len`.
 *
 * # Safety
 * `tr` must be a live trace handle and `out` writable.
 */
BlStatus bl_trace_round(const BlTrace *tr, size_t t, BlRound *out);

/**
 * Copies the final combination into `buf`, which holds `len` doubles;
 * `len` must equal the number of columns.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
BlStatus bl_trace_weights(const BlTrace *tr, double *buf, size_t len);

/**
 * The trace as CSV; release with `bl_string_free`.
 *
 * # Safety
 * `tr` must be a live trace handle and `out` writable.
 */
BlStatus bl_trace_csv(const BlTrace *tr, char **out);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void bl_trace_free(BlTrace *t);

/**
 * Zero-loss/finite-loss decomposition of `m`.
 *
 * # Safety
 * `m` must be a live matrix handle and `out` writable.
 */
BlStatus bl_decompose(const BlMatrix *m, uint64_t seed, BlDecomposition **out);

/**
 * Size of the zero-loss set, or 0 for null.
 *
 * # Safety
 * `d` must be null or a live decomposition handle.
 */
size_t bl_decomposition_zero_count(const BlDecomposition *d);

/**
 * Whether example `i` is in the zero-loss set.
 *
 * # Safety
 * `d` must be null or a live decomposition handle.
 */
bool bl_decomposition_in_zero_set(const BlDecomposition *d, size_t i);

/**
 * Margin certificate `gamma`; `NotFound` when the zero-loss set is empty.
 *
 * # Safety
 * `d` must be a live decomposition handle and `out` writable.
 */
BlStatus bl_decomposition_gamma(const BlDecomposition *d, double *out);

/**
 * Minimal unnormalized loss on the finite set.
 *
 * # Safety
 * `d` must be a live decomposition handle and `out` writable.
 */
BlStatus bl_decomposition_finite_loss(const BlDecomposition *d, double *out);

/**
 * Full JSON report; `m` must be the matrix that was decomposed.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
BlStatus bl_decomposition_json(const BlDecomposition *d, const BlMatrix *m, char **out);

/**
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void bl_decomposition_free(BlDecomposition *d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOOSTLAB_H */
