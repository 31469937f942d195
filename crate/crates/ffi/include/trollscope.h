#ifndef TROLLSCOPE_H
#define TROLLSCOPE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_ARGUMENT = 2,
  TS_STATUS_IO = 3,
  /**
   * Malformed or inconsistent input data.
   */
  TS_STATUS_DATA = 4,
  TS_STATUS_DIMENSION_MISMATCH = 5,
  TS_STATUS_UNKNOWN_USER = 6,
  TS_STATUS_PANIC = 7,
} TsStatus;

typedef struct TsCorpus TsCorpus;

typedef struct TsModel TsModel;

typedef struct TsCorpusCounts {
  size_t publications;
  size_t comments;
  size_t replies;
  size_t users;
} TsCorpusCounts;

typedef struct TsActivityStats {
  uint64_t total_comments;
  uint64_t days_in_forum;
  uint64_t active_days;
  uint64_t multi_comment_days;
  uint64_t publications_commented;
} TsActivityStats;

typedef struct TsMetrics {
  double accuracy;
  double precision;
  double recall;
  double f_score;
  uint64_t tp;
  uint64_t fp;
  uint64_t fn_;
  uint64_t tn;
} TsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a corpus directory. `timezone` may be null for Europe/Sofia.
 *
 * # Safety
 * `dir` and a non-null `timezone` must be NUL-terminated strings; `out`
 * must be writable.
 */
enum TsStatus ts_corpus_load(const char *dir, const char *timezone, struct TsCorpus **out);

/**
 * # Safety
 * `corpus` must be null or a handle from [`ts_corpus_load`] not yet freed.
 */
void ts_corpus_free(struct TsCorpus *corpus);

/**
 * # Safety
 * `corpus` must be a live handle and `out` writable.
 */
enum TsStatus ts_corpus_counts(const struct TsCorpus *corpus, struct TsCorpusCounts *out);

/**
 * # Safety
 * `corpus` must be a live handle, `user_id` a NUL-terminated string and
 * `out` writable.
 */
enum TsStatus ts_corpus_activity_stats(const struct TsCorpus *corpus,
                                       const char *user_id,
                                       struct TsActivityStats *out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum TsStatus ts_model_load(const char *path, struct TsModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`ts_model_load`] not yet freed.
 */
void ts_model_free(struct TsModel *model);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum TsStatus ts_model_n_features(const struct TsModel *model, size_t *out);

/**
 * Classifies one raw feature row. `label` receives +1 or -1; `decision`
 * may be null.
 *
 * # Safety
 * `row` must point to `len` doubles; `label` must be writable.
 */
enum TsStatus ts_model_predict(const struct TsModel *model,
                               const double *row,
                               size_t len,
                               int8_t *label,
                               double *decision);

/**
 * # Safety
 * `predictions` and `gold` must each point to `n` values; `out` writable.
 */
enum TsStatus ts_compute_metrics(const int8_t *predictions,
                                 const int8_t *gold,
                                 size_t n,
                                 int8_t positive_label,
                                 struct TsMetrics *out);

/**
 * `exp(-gamma * |x - z|^2)` for two vectors of length `n`.
 *
 * # Safety
 * `x` and `z` must point to `n` doubles; `out` writable.
 */
enum TsStatus ts_rbf(const double *x, const double *z, size_t n, double gamma, double *out);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *ts_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ts_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TROLLSCOPE_H */
