#ifndef TRENDLAB_H
#define TRENDLAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which windowed count [`trendlab_count`] returns.
 */
typedef enum TrendlabCount {
  /**
   * Receipts at or before `t` (`window` ignored).
   */
  TRENDLAB_COUNT_DEGREE_AT = 0,
  /**
   * Receipts in `(t - window, t]`.
   */
  TRENDLAB_COUNT_WINDOW_GAIN = 1,
  /**
   * Receipts in `(t, t + window]`.
   */
  TRENDLAB_COUNT_FUTURE_GAIN = 2,
} TrendlabCount;

typedef enum TrendlabPredictor {
  TRENDLAB_PREDICTOR_INDEGREE = 0,
  TRENDLAB_PREDICTOR_PAGERANK = 1,
  TRENDLAB_PREDICTOR_PBP = 2,
  TRENDLAB_PREDICTOR_TBP = 3,
  TRENDLAB_PREDICTOR_RBDM = 4,
  TRENDLAB_PREDICTOR_RBNDM = 5,
} TrendlabPredictor;

typedef enum TrendlabStatus {
  TRENDLAB_STATUS_OK = 0,
  TRENDLAB_STATUS_NULL_POINTER = 1,
  TRENDLAB_STATUS_INVALID_UTF8 = 2,
  TRENDLAB_STATUS_IO = 3,
  TRENDLAB_STATUS_PARSE = 4,
  TRENDLAB_STATUS_EMPTY_DATASET = 5,
  TRENDLAB_STATUS_UNKNOWN_NODE = 6,
  TRENDLAB_STATUS_INVALID_ARGUMENT = 7,
  TRENDLAB_STATUS_NO_ELIGIBLE_NODES = 8,
  TRENDLAB_STATUS_NOT_CONVERGED = 9,
  TRENDLAB_STATUS_OUT_OF_RANGE = 10,
  TRENDLAB_STATUS_PANIC = 99,
} TrendlabStatus;

/**
 * Opaque event history.
 */
typedef struct TrendlabHistory TrendlabHistory;

/**
 * Opaque ranked score list (score descending, node id ascending).
 */
typedef struct TrendlabScores TrendlabScores;

/**
 * Predictor parameters. Fill with [`trendlab_params_default`] first.
 */
typedef struct TrendlabParams {
  double lambda;
  double gamma;
  double teleport;
  double pagerank_tol;
  uint32_t pagerank_max_iters;
} TrendlabParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *trendlab_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next trendlab call on the same thread.
 */
const char *trendlab_last_error(void);

/**
 * # Safety
 * `out` must be a valid pointer to a `TrendlabParams`.
 */
enum TrendlabStatus trendlab_params_default(struct TrendlabParams *out);

/**
 * Loads a canonical `source\ttarget\ttime` event file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TrendlabStatus trendlab_history_load(const char *path, struct TrendlabHistory **out);

/**
 * Builds a history from `len` parallel arrays of events.
 *
 * # Safety
 * `sources` and `targets` must point to `len` NUL-terminated strings,
 * `times` to `len` integers, and `out` must be valid.
 */
enum TrendlabStatus trendlab_history_from_events(const char *const *sources,
                                                 const char *const *targets,
                                                 const int64_t *times,
                                                 size_t len,
                                                 struct TrendlabHistory **out);

/**
 * # Safety
 * `h` must be null or a handle from this library not yet freed.
 */
void trendlab_history_free(struct TrendlabHistory *h);

/**
 * Writes node count, first and last event time.
 *
 * # Safety
 * `h` must be a live handle; output pointers must be valid.
 */
enum TrendlabStatus trendlab_history_info(const struct TrendlabHistory *h,
                                          size_t *node_count,
                                          int64_t *t_min,
                                          int64_t *t_max);

/**
 * # Safety
 * `h` must be a live handle, `node` a NUL-terminated string and `out` valid.
 */
enum TrendlabStatus trendlab_count(const struct TrendlabHistory *h,
                                   enum TrendlabCount kind,
                                   const char *node,
                                   int64_t t,
                                   int64_t window,
                                   uint64_t *out);

/**
 * # Safety
 * As [`trendlab_count`].
 */
enum TrendlabStatus trendlab_aged_degree(const struct TrendlabHistory *h,
                                         const char *node,
                                         int64_t t,
                                         double gamma,
                                         double *out);

/**
 * Scores every node eligible at `t`. `params` may be null for defaults.
 *
 * # Safety
 * `h` must be a live handle, `params` null or valid, `out` valid.
 */
enum TrendlabStatus trendlab_score(const struct TrendlabHistory *h,
                                   enum TrendlabPredictor predictor,
                                   int64_t t,
                                   int64_t tp,
                                   const struct TrendlabParams *params,
                                   struct TrendlabScores **out);

/**
 * Number of entries; 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t trendlab_scores_len(const struct TrendlabScores *s);

/**
 * Entry `index` in rank order. The node string lives as long as `s`.
 *
 * # Safety
 * `s` must be a live handle; output pointers must be valid.
 */
enum TrendlabStatus trendlab_scores_get(const struct TrendlabScores *s,
                                        size_t index,
                                        const char **node,
                                        double *score);

/**
 * # Safety
 * `s` must be null or a handle from [`trendlab_score`] not yet freed.
 */
void trendlab_scores_free(struct TrendlabScores *s);

/**
 * Kendall's tau over `len` paired values; tied pairs are excluded.
 *
 * # Safety
 * `x` and `y` must point to `len` doubles; `out` must be valid.
 */
enum TrendlabStatus trendlab_kendall_tau(const double *x, const double *y, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRENDLAB_H */
