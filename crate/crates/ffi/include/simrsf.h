#ifndef SIMRSF_H
#define SIMRSF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SimrsfStatus {
  SIMRSF_STATUS_OK = 0,
  SIMRSF_STATUS_NULL_POINTER = 1,
  SIMRSF_STATUS_INVALID_ARGUMENT = 2,
  SIMRSF_STATUS_IO = 3,
  SIMRSF_STATUS_PARSE = 4,
  SIMRSF_STATUS_INVALID_DATA = 5,
  SIMRSF_STATUS_INSUFFICIENT_DEATHS = 6,
  SIMRSF_STATUS_RETRY_CAP_EXHAUSTED = 7,
  SIMRSF_STATUS_INVALID_WEIGHTS = 8,
  SIMRSF_STATUS_CONFIG = 9,
  SIMRSF_STATUS_OUT_OF_RANGE = 10,
  SIMRSF_STATUS_PANIC = 99,
} SimrsfStatus;

typedef struct SimrsfAucCurve SimrsfAucCurve;

typedef struct SimrsfDataset SimrsfDataset;

typedef struct SimrsfPrediction SimrsfPrediction;

/**
 * Settings for one forest. `mtry = 0` selects ceil(sqrt(p)).
 */
typedef struct SimrsfForestParams {
  size_t n_trees;
  size_t d0;
  size_t mtry;
} SimrsfForestParams;

/**
 * SB-RSF settings. `threshold <= 0` disables thresholding.
 */
typedef struct SimrsfParams {
  struct SimrsfForestParams global;
  struct SimrsfForestParams per_case;
  uint64_t seed;
  bool dependent_censoring;
  double threshold;
} SimrsfParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next failing call on the same thread.
 */
const char *simrsf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *simrsf_version(void);

/**
 * Load a CSV with `time`, `event` and optional `id` columns; every other
 * column is a numeric covariate.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SimrsfStatus simrsf_dataset_load_csv(const char *path, struct SimrsfDataset **out);

/**
 * Build a dataset from arrays. `covariates` is row-major `n x p`;
 * `event[i]` is 0 or 1.
 *
 * # Safety
 * `time` and `event` must point to `n` elements, `covariates` to `n * p`.
 */
enum SimrsfStatus simrsf_dataset_from_arrays(const double *time,
                                             const uint8_t *event,
                                             const double *covariates,
                                             size_t n,
                                             size_t p,
                                             struct SimrsfDataset **out);

/**
 * Simulate a dataset from `key = value` configuration text (may be NULL
 * or empty for the defaults) with the given seed.
 *
 * # Safety
 * `config` must be NULL or NUL-terminated; `out` must be valid.
 */
enum SimrsfStatus simrsf_simulate(const char *config, uint64_t seed, struct SimrsfDataset **out);

/**
 * Random train/test split; `fraction` is the training share.
 *
 * # Safety
 * `data` must be a live handle; `train` and `test` valid pointers.
 */
enum SimrsfStatus simrsf_dataset_split(const struct SimrsfDataset *data,
                                       double fraction,
                                       uint64_t seed,
                                       struct SimrsfDataset **train,
                                       struct SimrsfDataset **test);

/**
 * Number of records, or 0 for NULL.
 *
 * # Safety
 * `data` must be NULL or a live handle.
 */
size_t simrsf_dataset_len(const struct SimrsfDataset *data);

/**
 * Number of covariate columns, or 0 for NULL.
 *
 * # Safety
 * `data` must be NULL or a live handle.
 */
size_t simrsf_dataset_n_features(const struct SimrsfDataset *data);

/**
 * # Safety
 * `data` must be NULL or a handle not yet freed.
 */
void simrsf_dataset_free(struct SimrsfDataset *data);

/**
 * Plain random survival forest. Seeds follow the command-line tool, so
 * the same `seed` gives the same forest as `simrsf run`.
 *
 * # Safety
 * All pointers must be valid; handles live.
 */
enum SimrsfStatus simrsf_rsf_fit_predict(const struct SimrsfDataset *train,
                                         const struct SimrsfDataset *test,
                                         const struct SimrsfForestParams *params,
                                         uint64_t seed,
                                         struct SimrsfPrediction **out);

/**
 * Similarity-based forest: one weighted forest per test record.
 *
 * # Safety
 * All pointers must be valid; handles live.
 */
enum SimrsfStatus simrsf_sbrsf_fit_predict(const struct SimrsfDataset *train,
                                           const struct SimrsfDataset *test,
                                           const struct SimrsfParams *params,
                                           struct SimrsfPrediction **out);

/**
 * Number of predicted test records, or 0 for NULL.
 *
 * # Safety
 * `pred` must be NULL or a live handle.
 */
size_t simrsf_prediction_len(const struct SimrsfPrediction *pred);

/**
 * Cumulative hazard of test record `case` at time `t`.
 *
 * # Safety
 * `pred` must be a live handle and `out` valid.
 */
enum SimrsfStatus simrsf_prediction_chf(const struct SimrsfPrediction *pred,
                                        size_t case_,
                                        double t,
                                        double *out);

/**
 * Borrow the jump times and values of one predicted curve. The arrays
 * stay valid until the prediction is freed.
 *
 * # Safety
 * `pred` must be a live handle; output pointers valid.
 */
enum SimrsfStatus simrsf_prediction_curve(const struct SimrsfPrediction *pred,
                                          size_t case_,
                                          const double **times,
                                          const double **values,
                                          size_t *len);

/**
 * Sampling weight of training record `i` for test record `j`.
 *
 * # Safety
 * `pred` must be a live handle and `out` valid.
 */
enum SimrsfStatus simrsf_prediction_weight(const struct SimrsfPrediction *pred,
                                           size_t i,
                                           size_t j,
                                           double *out);

/**
 * # Safety
 * `pred` must be NULL or a handle not yet freed.
 */
void simrsf_prediction_free(struct SimrsfPrediction *pred);

/**
 * Time-varying AUC of `pred` on `test` at `n` grid times.
 *
 * # Safety
 * `grid` must point to `n` doubles; handles live; `out` valid.
 */
enum SimrsfStatus simrsf_time_varying_auc(const struct SimrsfDataset *test,
                                          const struct SimrsfPrediction *pred,
                                          const double *grid,
                                          size_t n,
                                          struct SimrsfAucCurve **out);

/**
 * Number of grid points, or 0 for NULL.
 *
 * # Safety
 * `curve` must be NULL or a live handle.
 */
size_t simrsf_auc_len(const struct SimrsfAucCurve *curve);

/**
 * AUC at grid point `k`; writes NaN where no case or no control exists.
 *
 * # Safety
 * `curve` must be a live handle and `out` valid.
 */
enum SimrsfStatus simrsf_auc_value(const struct SimrsfAucCurve *curve, size_t k, double *out);

/**
 * # Safety
 * `curve` must be NULL or a handle not yet freed.
 */
void simrsf_auc_free(struct SimrsfAucCurve *curve);

/**
 * Returns 1 if `status` is [`SimrsfStatus::Ok`].
 */
int simrsf_ok(enum SimrsfStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMRSF_H */
