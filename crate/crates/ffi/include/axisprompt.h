#ifndef AXISPROMPT_H
#define AXISPROMPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum AxpStatus {
  AXP_STATUS_OK = 0,
  AXP_STATUS_NULL_POINTER = 1,
  AXP_STATUS_INVALID_UTF8 = 2,
  AXP_STATUS_CONFIG = 3,
  AXP_STATUS_IO = 4,
  AXP_STATUS_GEOMETRY = 5,
  AXP_STATUS_RENDER = 6,
  AXP_STATUS_MARKS = 7,
  AXP_STATUS_PROMPT = 8,
  AXP_STATUS_CLIENT = 9,
  AXP_STATUS_EVAL = 10,
  AXP_STATUS_INVALID_ARGUMENT = 11,
  AXP_STATUS_PANIC = 12,
} AxpStatus;

// Opaque point cloud.
typedef struct AxpCloud AxpCloud;

// Opaque pipeline configuration.
typedef struct AxpConfig AxpConfig;

// Aggregates of an evaluation run; absent quantities are NaN.
typedef struct AxpSummary {
  double nrmse_center;
  double nrmse_bbx;
  double success_rate;
  double acc_025;
  double acc_05;
  double parse_failure_rate;
  uintptr_t n_scenes;
  uintptr_t n_objects;
  uintptr_t isolation_violations;
} AxpSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call on this thread; do not free it.
const char *axp_last_error(void);

// Reads a PLY or XYZ file into a new cloud handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum AxpStatus axp_cloud_load(const char *path, struct AxpCloud **out);

// Builds a cloud from `n` xyz triples and optional per-point instance ids
// (`ids` may be null; negative ids mean unlabeled).
//
// # Safety
// `xyz` must hold `3 * n` doubles, `ids` (if non-null) `n` integers.
enum AxpStatus axp_cloud_from_xyz(const double *xyz,
                                  const int64_t *ids,
                                  uintptr_t n,
                                  struct AxpCloud **out);

// Number of points, or 0 for a null handle.
//
// # Safety
// `cloud` must be null or a live handle.
uintptr_t axp_cloud_len(const struct AxpCloud *cloud);

// Axis-aligned box of one instance, or of the whole cloud when
// `instance < 0`. Writes three doubles each to `out_min` and `out_max`.
//
// # Safety
// `cloud` must be a live handle; outputs must hold three doubles.
enum AxpStatus axp_cloud_aabb(const struct AxpCloud *cloud,
                              int64_t instance,
                              double *out_min,
                              double *out_max);

// # Safety
// `cloud` must be null or a handle not yet freed.
void axp_cloud_free(struct AxpCloud *cloud);

// Loads a pipeline config (`path` may be null for defaults) and applies
// `n_overrides` `key=value` strings.
//
// # Safety
// Strings must be NUL-terminated; `overrides` must hold `n_overrides`
// pointers; `out` must be writable.
enum AxpStatus axp_config_load(const char *path,
                               const char *const *overrides,
                               uintptr_t n_overrides,
                               struct AxpConfig **out);

// # Safety
// `config` must be null or a handle not yet freed.
void axp_config_free(struct AxpConfig *config);

// Writes prompt bundles for every scene; stores the scene count.
//
// # Safety
// `config` must be a live handle and `out_scenes` writable.
enum AxpStatus axp_render(const struct AxpConfig *config, uintptr_t *out_scenes);

// Runs an offline evaluation with the ground-truth oracle.
//
// # Safety
// `config` must be a live handle and `out` writable.
enum AxpStatus axp_eval_mock(const struct AxpConfig *config, struct AxpSummary *out);

// Euclidean distance from `p` to the center of the box `[min, max]`.
//
// # Safety
// Each pointer must reference three doubles.
double axp_dist_to_center(const double *p, const double *min, const double *max);

// Distance from `p` to the box `[min, max]` (0 inside).
//
// # Safety
// Each pointer must reference three doubles.
double axp_dist_to_bbx(const double *p, const double *min, const double *max);

// Fraction of `n` predicted boxes whose IoU with the matching truth box
// reaches `threshold`. Boxes are six doubles `(min xyz, max xyz)`.
//
// # Safety
// `pred` and `truth` must each hold `6 * n` doubles; `out` writable.
enum AxpStatus axp_acc_at_iou(const double *pred,
                              const double *truth,
                              uintptr_t n,
                              double threshold,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AXISPROMPT_H */
