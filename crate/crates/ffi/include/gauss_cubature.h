#ifndef GAUSS_CUBATURE_H
#define GAUSS_CUBATURE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes; the numeric values match the command-line exit codes.
 */
typedef enum GcStatus {
  GC_STATUS_OK = 0,
  GC_STATUS_NO_CUBATURE = 10,
  GC_STATUS_INVALID_ARGUMENT = 20,
  GC_STATUS_NUMERICAL_FAILURE = 30,
  GC_STATUS_NULL_POINTER = 40,
  GC_STATUS_PANIC = 50,
} GcStatus;

/**
 * Opaque moment sequence.
 */
typedef struct GcMoments GcMoments;

/**
 * Opaque cubature rule with its exactness report.
 */
typedef struct GcRule GcRule;

/**
 * Outcome of the existence test.
 */
typedef struct GcVerdict {
  bool exists;
  double relative_residual;
  double commutation_defect;
  size_t rank;
  /**
   * `t_m`, rows of the system.
   */
  size_t rows;
  /**
   * `r_{2m}`, unknowns of the system.
   */
  size_t cols;
} GcVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *gc_last_error(void);

/**
 * Moments of a catalog measure (`lebesgue^2`, `symmetrized:0.5`, ...) up to `d_max`.
 *
 * # Safety
 * `spec` must be a nul-terminated string and `out` a valid pointer.
 */
enum GcStatus gc_moments_catalog(const char *spec, size_t d_max, struct GcMoments **out);

/**
 * Reads a moment file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum GcStatus gc_moments_load(const char *path, struct GcMoments **out);

/**
 * # Safety
 * `moments` must come from this library and not be freed twice. Null is ignored.
 */
void gc_moments_free(struct GcMoments *moments);

/**
 * Dimension `n`, or 0 for a null handle.
 *
 * # Safety
 * `moments` must be null or a live handle.
 */
size_t gc_moments_dim(const struct GcMoments *moments);

/**
 * Highest stored degree, or 0 for a null handle.
 *
 * # Safety
 * `moments` must be null or a live handle.
 */
size_t gc_moments_max_degree(const struct GcMoments *moments);

/**
 * Existence test for degree `2m - 1`. Returns `NoCubature` when the verdict
 * is negative; `out` is filled in both cases.
 *
 * # Safety
 * `moments` must be a live handle and `out` a valid pointer.
 */
enum GcStatus gc_exists(const struct GcMoments *moments,
                        size_t m,
                        double tol,
                        struct GcVerdict *out);

/**
 * Builds the Gaussian rule of degree `2m - 1`.
 *
 * # Safety
 * `moments` must be a live handle and `out` a valid pointer.
 */
enum GcStatus gc_cubature(const struct GcMoments *moments,
                          size_t m,
                          double tol,
                          uint64_t seed,
                          struct GcRule **out);

/**
 * # Safety
 * `rule` must come from this library and not be freed twice. Null is ignored.
 */
void gc_rule_free(struct GcRule *rule);

/**
 * # Safety
 * `rule` must be null or a live handle.
 */
size_t gc_rule_dim(const struct GcRule *rule);

/**
 * # Safety
 * `rule` must be null or a live handle.
 */
size_t gc_rule_node_count(const struct GcRule *rule);

/**
 * Largest absolute moment error of the rule up to its precision, or NaN.
 *
 * # Safety
 * `rule` must be null or a live handle.
 */
double gc_rule_max_error(const struct GcRule *rule);

/**
 * Copies node coordinates row-major into `buf`, which must hold
 * `node_count * dim` values.
 *
 * # Safety
 * `rule` must be a live handle and `buf` valid for `len` writes.
 */
enum GcStatus gc_rule_nodes(const struct GcRule *rule, double *buf, size_t len);

/**
 * Copies weights into `buf`, which must hold `node_count` values.
 *
 * # Safety
 * `rule` must be a live handle and `buf` valid for `len` writes.
 */
enum GcStatus gc_rule_weights(const struct GcRule *rule, double *buf, size_t len);

/**
 * Writes the rule file.
 *
 * # Safety
 * `rule` must be a live handle and `path` a nul-terminated string.
 */
enum GcStatus gc_rule_store(const struct GcRule *rule, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAUSS_CUBATURE_H */
