/* C interface to the viewplan coverage planner. */

#ifndef VIEWPLAN_H
#define VIEWPLAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VpStatus {
  VP_STATUS_OK = 0,
  VP_STATUS_NULL_POINTER = 1,
  VP_STATUS_INVALID_ARGUMENT = 2,
  VP_STATUS_IO = 3,
  VP_STATUS_FORMAT = 4,
  VP_STATUS_DIGEST_MISMATCH = 5,
  VP_STATUS_NUMERIC = 6,
  VP_STATUS_BUFFER_TOO_SMALL = 7,
  VP_STATUS_NOT_FOUND = 8,
  VP_STATUS_PANIC = 9,
} VpStatus;

typedef enum VpInstanceKind {
  VP_INSTANCE_KIND_GRID_TRAP = 0,
  VP_INSTANCE_KIND_RANDOM_PATCHES = 1,
} VpInstanceKind;

typedef enum VpMethod {
  VP_METHOD_GREEDY = 0,
  VP_METHOD_ALT_LAMBDA = 1,
  VP_METHOD_FIXED_LAMBDA = 2,
} VpMethod;

typedef enum VpAlgorithm {
  VP_ALGORITHM_SARSA = 0,
  VP_ALGORITHM_WATKINS_Q = 1,
  VP_ALGORITHM_TD = 2,
} VpAlgorithm;

typedef struct VpModel VpModel;

typedef struct VpPlan VpPlan;

typedef struct VpTable VpTable;

/**
 * Training hyperparameters. Fill with `vp_train_config_default` and
 * override fields as needed. `lambda_set` may be null, in which case the
 * default set {0, 1} is used; otherwise it must point to `lambda_count`
 * values that stay valid for the duration of `vp_train`.
 */
typedef struct VpTrainConfig {
  enum VpAlgorithm algorithm;
  uint64_t seed;
  uint64_t max_episodes;
  uint64_t epsilon_episodes;
  double alpha;
  double mu_e;
  double epsilon;
  double rcc;
  uint32_t hidden;
  const double *lambda_set;
  size_t lambda_count;
} VpTrainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `vp_*` call on the same thread.
 */
const char *vp_last_error(void);

/**
 * Loads a coverage cache file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum VpStatus vp_table_load(const char *path, struct VpTable **out);

/**
 * Generates a certified synthetic instance.
 *
 * # Safety
 * `out` must be writable.
 */
enum VpStatus vp_table_generate(enum VpInstanceKind kind, uint64_t seed, struct VpTable **out);

/**
 * Writes the table as a coverage cache file.
 *
 * # Safety
 * `table` must be a live handle; `path` a NUL-terminated string.
 */
enum VpStatus vp_table_save(const struct VpTable *table, const char *path);

/**
 * Number of candidate views in the table, or 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t vp_table_view_count(const struct VpTable *table);

/**
 * Exact minimum cover size recorded at generation time.
 * Returns `VP_STATUS_NOT_FOUND` if the table carries no such count.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum VpStatus vp_table_oracle_count(const struct VpTable *table, size_t *out);

/**
 * # Safety
 * `table` must be null or a handle not yet freed.
 */
void vp_table_free(struct VpTable *table);

/**
 * Plans with a fixed λ schedule. `lambda` is used only by `VP_METHOD_FIXED_LAMBDA`.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum VpStatus vp_plan_baseline(const struct VpTable *table,
                               enum VpMethod method,
                               double lambda,
                               double rcc,
                               struct VpPlan **out);

/**
 * Minimum-size plan by exhaustive search (small tables only).
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum VpStatus vp_plan_exact(const struct VpTable *table, double rcc, struct VpPlan **out);

/**
 * Default hyperparameters for `algorithm`.
 *
 * # Safety
 * `out` must be writable.
 */
enum VpStatus vp_train_config_default(enum VpAlgorithm algorithm,
                                      uint64_t seed,
                                      struct VpTrainConfig *out);

/**
 * Trains a λ-selection policy on `table`.
 *
 * # Safety
 * `table` must be a live handle, `config` a valid config (see
 * `VpTrainConfig`), and `out` writable.
 */
enum VpStatus vp_train(const struct VpTable *table,
                       const struct VpTrainConfig *config,
                       struct VpModel **out);

/**
 * # Safety
 * `model` must be a live handle; `path` a NUL-terminated string.
 */
enum VpStatus vp_model_save(const struct VpModel *model, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum VpStatus vp_model_load(const char *path, struct VpModel **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void vp_model_free(struct VpModel *model);

/**
 * Plans with a trained model. Fails with `VP_STATUS_DIGEST_MISMATCH` if the
 * model was trained on another table, unless `allow_digest_mismatch` is nonzero.
 *
 * # Safety
 * `model` and `table` must be live handles; `out` must be writable.
 */
enum VpStatus vp_plan_with_model(const struct VpModel *model,
                                 const struct VpTable *table,
                                 double rcc,
                                 int32_t allow_digest_mismatch,
                                 struct VpPlan **out);

/**
 * Number of views in the plan, or 0 for a null handle.
 *
 * # Safety
 * `plan` must be null or a live handle.
 */
size_t vp_plan_len(const struct VpPlan *plan);

/**
 * Copies the selected view indices into `buf`. `*len` receives the plan
 * length; if `cap` is smaller, nothing is copied and
 * `VP_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `plan` must be a live handle, `buf` writable for `cap` elements (may be
 * null when `cap` is 0), and `len` writable.
 */
enum VpStatus vp_plan_order(const struct VpPlan *plan, size_t *buf, size_t cap, size_t *len);

/**
 * Covered fraction of the achievable area, or NaN for a null handle.
 *
 * # Safety
 * `plan` must be null or a live handle.
 */
double vp_plan_coverage_fraction(const struct VpPlan *plan);

/**
 * 1 if the plan reached its coverage target, 0 otherwise (or for null).
 *
 * # Safety
 * `plan` must be null or a live handle.
 */
int32_t vp_plan_complete(const struct VpPlan *plan);

/**
 * # Safety
 * `plan` must be null or a handle not yet freed.
 */
void vp_plan_free(struct VpPlan *plan);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VIEWPLAN_H */
