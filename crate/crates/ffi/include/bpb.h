#ifndef BPB_H
#define BPB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BpbStatus {
  BPB_STATUS_OK = 0,
  BPB_STATUS_IO = 1,
  BPB_STATUS_CONFIG = 2,
  BPB_STATUS_NUMERICAL = 3,
  BPB_STATUS_INFEASIBLE = 4,
  BPB_STATUS_NULL_POINTER = 5,
  BPB_STATUS_INVALID_ARGUMENT = 6,
  BPB_STATUS_PANIC = 7,
} BpbStatus;

/**
 * A generated benchmark objective.
 */
typedef struct BpbInstance BpbInstance;

/**
 * A Nystrom-sketched kernel regressor over real vectors with an RBF kernel.
 */
typedef struct BpbSketch BpbSketch;

/**
 * Curvature constants of an instance and the ratios derived from them.
 * `kappa_f` and `kappa_g` are NaN for instances without a BP decomposition.
 */
typedef struct BpbConstants {
  double kappa_f;
  double kappa_g;
  double gamma;
  double zeta;
  double alpha_bp;
  double alpha_ws;
  double alpha_dist;
} BpbConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *bpb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bpb_version(void);

/**
 * Runs `command` (`simulate`, `offline`, `curvature` or `deff-sweep`) on a
 * JSON experiment document. A non-NULL `out_dir` replaces the document's
 * output directory.
 *
 * # Safety
 * `command` and `config_json` must be NUL-terminated strings; `out_dir` may
 * be NULL.
 */
enum BpbStatus bpb_run(const char *command, const char *config_json, const char *out_dir);

/**
 * Generates a random instance of `family` (`bp`, `ws_mixture`, ...) on `n` items.
 *
 * # Safety
 * `family` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BpbStatus bpb_instance_new(const char *family,
                                size_t n,
                                uint64_t seed,
                                struct BpbInstance **out_handle);

/**
 * # Safety
 * `handle` must come from [`bpb_instance_new`] and not be used afterwards.
 */
void bpb_instance_free(struct BpbInstance *handle);

/**
 * # Safety
 * `handle` must be a live instance and `n` a valid pointer.
 */
enum BpbStatus bpb_instance_size(const struct BpbInstance *handle, size_t *n);

/**
 * Objective value of the set `ids[0..len]`.
 *
 * # Safety
 * `ids` must point to `len` readable items (may be NULL when `len` is 0).
 */
enum BpbStatus bpb_instance_value(const struct BpbInstance *handle,
                                  const size_t *ids,
                                  size_t len,
                                  double *value);

/**
 * Greedy selection of `k` items written to `ids[0..k]` in pick order.
 *
 * # Safety
 * `ids` must have room for `k` items.
 */
enum BpbStatus bpb_instance_greedy(const struct BpbInstance *handle, size_t k, size_t *ids);

/**
 * Curvatures, weak-submodularity constants and approximation ratios.
 *
 * # Safety
 * `handle` must be a live instance and `constants` a valid pointer.
 */
enum BpbStatus bpb_instance_constants(const struct BpbInstance *handle,
                                      struct BpbConstants *constants);

/**
 * New empty sketch over `dim`-dimensional inputs with an RBF kernel.
 *
 * # Safety
 * `out_handle` must be a valid pointer.
 */
enum BpbStatus bpb_sketch_new(size_t dim,
                              double bandwidth,
                              double lambda,
                              double eta,
                              double budget,
                              uint64_t seed,
                              struct BpbSketch **out_handle);

/**
 * # Safety
 * `handle` must come from [`bpb_sketch_new`] and not be used afterwards.
 */
void bpb_sketch_free(struct BpbSketch *handle);

/**
 * Adds the observation `(x, y)`. `joined` (optional) receives 1 when the
 * point entered the dictionary.
 *
 * # Safety
 * `x` must point to `dim` readable doubles; `joined` may be NULL.
 */
enum BpbStatus bpb_sketch_observe(struct BpbSketch *handle,
                                  const double *x,
                                  double y,
                                  uint8_t *joined);

/**
 * Posterior mean and variance at `count` points stored row-major in `xs`.
 *
 * # Safety
 * `xs` must hold `count * dim` doubles; `mean` and `var` room for `count`.
 */
enum BpbStatus bpb_sketch_predict(const struct BpbSketch *handle,
                                  const double *xs,
                                  size_t count,
                                  double *mean,
                                  double *var);

/**
 * Number of observations and dictionary size.
 *
 * # Safety
 * `handle` must be live; either output may be NULL.
 */
enum BpbStatus bpb_sketch_sizes(const struct BpbSketch *handle, size_t *t, size_t *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BPB_H */
