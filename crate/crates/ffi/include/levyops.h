#ifndef LEVYOPS_H
#define LEVYOPS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Integration region for truncated moments.
 */
typedef enum LevyRegion {
  /**
   * `|y| < r`; requires `c > sigma`.
   */
  LEVY_REGION_INSIDE = 0,
  /**
   * `|y| >= r`; requires `c < sigma`.
   */
  LEVY_REGION_OUTSIDE = 1,
} LevyRegion;

/**
 * Result of every fallible call.
 */
typedef enum LevyStatus {
  LEVY_STATUS_OK = 0,
  LEVY_STATUS_NULL_POINTER = 1,
  LEVY_STATUS_INVALID_ARGUMENT = 2,
  LEVY_STATUS_INVALID_MEASURE = 3,
  LEVY_STATUS_REJECTED = 4,
  LEVY_STATUS_ASSUMPTION_FAILED = 5,
  LEVY_STATUS_CONFIG = 6,
  LEVY_STATUS_IO = 7,
  LEVY_STATUS_PANIC = 8,
} LevyStatus;

/**
 * Opaque periodic grid field.
 */
typedef struct LevyField LevyField;

/**
 * Opaque Lévy measure.
 */
typedef struct LevyMeasure LevyMeasure;

/**
 * Structural checks on the default grids.
 */
typedef struct LevyAssumptions {
  double lambda_hat;
  double nondegen_hat;
  double cancellation_max;
  bool lambda_finite;
  bool nondegenerate;
  bool cancellation_ok;
  bool passes;
} LevyAssumptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *levy_last_error(void);

/**
 * Builds a measure from a TOML table such as
 * `kind = "dyadic_comb"`, `dim = 1`, `sigma = 1.0`, `k_min = -30`, `k_max = 30`.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out_measure` a valid pointer.
 */
enum LevyStatus levy_measure_from_toml(const char *toml, struct LevyMeasure **out_measure);

/**
 * # Safety
 * `m` must come from `levy_measure_from_toml` and not be freed twice.
 */
void levy_measure_free(struct LevyMeasure *m);

/**
 * Dimension, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t levy_measure_dim(const struct LevyMeasure *m);

/**
 * Order sigma, or NaN for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
double levy_measure_order(const struct LevyMeasure *m);

/**
 * `nu({|y| >= r})`.
 *
 * # Safety
 * `m` must be a live handle and `out_value` valid.
 */
enum LevyStatus levy_measure_tail_mass(const struct LevyMeasure *m, double r, double *out_value);

/**
 * `int_region |y|^c nu(dy)` with the region split at `r`.
 *
 * # Safety
 * `m` must be a live handle and `out_value` valid.
 */
enum LevyStatus levy_measure_moment(const struct LevyMeasure *m,
                                    double c,
                                    double r,
                                    enum LevyRegion region,
                                    double *out_value);

/**
 * `N(xi)` at a frequency of length `dim`.
 *
 * # Safety
 * `xi` must point to `len` doubles and `out_value` be valid.
 */
enum LevyStatus levy_measure_nondegeneracy(const struct LevyMeasure *m,
                                           const double *xi,
                                           size_t len,
                                           double *out_value);

/**
 * First moment over the annulus `r1 <= |y| < r2`, written to `out_vec[0..dim]`.
 *
 * # Safety
 * `out_vec` must point to `len >= dim` writable doubles.
 */
enum LevyStatus levy_measure_cancellation(const struct LevyMeasure *m,
                                          double r1,
                                          double r2,
                                          double *out_vec,
                                          size_t len);

/**
 * Structural checks on 257 log-spaced radii and frequencies in `[2^-10, 2^10]`.
 *
 * # Safety
 * `m` must be a live handle and `out_report` valid.
 */
enum LevyStatus levy_measure_check_assumptions(const struct LevyMeasure *m,
                                               struct LevyAssumptions *out_report);

/**
 * Symbol `m(xi)` in closed form.
 *
 * # Safety
 * `xi` must point to `len` doubles; `out_re` and `out_im` must be valid.
 */
enum LevyStatus levy_symbol_eval(const struct LevyMeasure *m,
                                 const double *xi,
                                 size_t len,
                                 double *out_re,
                                 double *out_im);

/**
 * Field on `[0, 2pi)^dim` with `n` nodes per axis from `n^dim` row-major values.
 *
 * # Safety
 * `values` must point to `len` doubles and `out_field` be valid.
 */
enum LevyStatus levy_field_new(size_t dim,
                               size_t n,
                               const double *values,
                               size_t len,
                               struct LevyField **out_field);

/**
 * # Safety
 * `f` must come from this library and not be freed twice.
 */
void levy_field_free(struct LevyField *f);

/**
 * Number of values, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t levy_field_len(const struct LevyField *f);

/**
 * Copies the values into `out_values[0..len]`; `len` must equal the field length.
 *
 * # Safety
 * `out_values` must point to `len` writable doubles.
 */
enum LevyStatus levy_field_values(const struct LevyField *f, double *out_values, size_t len);

/**
 * `L u` through the symbol on the lattice frequencies.
 *
 * # Safety
 * Handles must be live and `out_field` valid.
 */
enum LevyStatus levy_apply_levy(const struct LevyMeasure *m,
                                const struct LevyField *u,
                                struct LevyField **out_field);

/**
 * `L u` by direct summation over the atoms (atomic measures only).
 *
 * # Safety
 * Handles must be live and `out_field` valid.
 */
enum LevyStatus levy_apply_levy_direct(const struct LevyMeasure *m,
                                       const struct LevyField *u,
                                       struct LevyField **out_field);

/**
 * `(-Delta)^{sigma/2} u`, or `(1 - Delta)^{sigma/2} u` when `shifted`.
 *
 * # Safety
 * `u` must be live and `out_field` valid.
 */
enum LevyStatus levy_fractional_laplacian(const struct LevyField *u,
                                          double sigma,
                                          bool shifted,
                                          struct LevyField **out_field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEVYOPS_H */
