#ifndef SHIFT_INDEX_H
#define SHIFT_INDEX_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SiStatus {
  SI_STATUS_OK = 0,
  SI_STATUS_NULL_POINTER = 1,
  SI_STATUS_INVALID_UTF8 = 2,
  SI_STATUS_PARSE = 3,
  SI_STATUS_SCHEMA = 4,
  SI_STATUS_DOMAIN = 5,
  SI_STATUS_DIMENSION_CAP = 6,
  SI_STATUS_NOT_INVERTIBLE = 7,
  SI_STATUS_IO = 8,
  SI_STATUS_NUMERICAL = 9,
  SI_STATUS_PANIC = 10,
} SiStatus;

/**
 * An operator with shifts.
 */
typedef struct SiOperator SiOperator;

/**
 * Kernel and cokernel dimensions with the spectral gap of the finest level.
 */
typedef struct SiIndex {
  size_t ker;
  size_t coker;
  int64_t index;
  double gap;
  /**
   * 1 when both truncation levels agree and show a trusted gap.
   */
  int32_t converged;
} SiIndex;

/**
 * Outcome of the ellipticity certificate.
 */
typedef struct SiEllipticity {
  /**
   * 1 elliptic, 0 not elliptic, -1 inconclusive.
   */
  int32_t verdict;
  double min_sv;
  double scale;
} SiEllipticity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *si_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Owned by the library.
 */
const char *si_last_error(void);

/**
 * Parses a JSON spec into a new handle stored in `*out`.
 *
 * # Safety
 * `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
 */
enum SiStatus si_operator_from_json(const char *json, struct SiOperator **out);

/**
 * Reads a JSON or TOML spec file into a new handle stored in `*out`.
 *
 * # Safety
 * `path` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
 */
enum SiStatus si_operator_from_file(const char *path, struct SiOperator **out);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `op` must be NULL or a handle not yet freed.
 */
void si_operator_free(struct SiOperator *op);

/**
 * Torus dimension `d` of the operator.
 *
 * # Safety
 * `op` must be a live handle or NULL; `out` must be writable or NULL.
 */
enum SiStatus si_operator_dimension(const struct SiOperator *op, size_t *out);

/**
 * Fredholm index of `D` on the torus from Fourier truncations `K/2` and `K`.
 *
 * # Safety
 * `op` must be a live handle or NULL; `out` must be writable or NULL.
 */
enum SiStatus si_index(const struct SiOperator *op, size_t k, struct SiIndex *out);

/**
 * Fredholm index of the cylinder operator `B_ε` from truncations `(3K/4, 3H/4)` and `(K, H)`.
 *
 * # Safety
 * `op` must be a live handle or NULL; `out` must be writable or NULL.
 */
enum SiStatus si_cylinder_index(const struct SiOperator *op,
                                size_t k,
                                size_t h,
                                double eps,
                                struct SiIndex *out);

/**
 * Ellipticity certificate on a uniform cosphere grid of resolution `grid`.
 *
 * # Safety
 * `op` must be a live handle or NULL; `out` must be writable or NULL.
 */
enum SiStatus si_check_elliptic(const struct SiOperator *op,
                                size_t grid,
                                struct SiEllipticity *out);

/**
 * Runs a JSON run configuration. The report is stored in `*report`
 * (free with `si_string_free`) and the process-style exit code in `*exit_code`.
 *
 * # Safety
 * `config_json` must be NULL or a NUL-terminated string; the out pointers must be writable or NULL.
 */
enum SiStatus si_run_json(const char *config_json, char **report, int32_t *exit_code);

/**
 * Frees a string returned by the library; NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string obtained from this library and not yet freed.
 */
void si_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHIFT_INDEX_H */
