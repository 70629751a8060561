#ifndef SUBPOISSON_H
#define SUBPOISSON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SP_SIDE_UPPER 0

#define SP_SIDE_LOWER 1

#define SP_SIDE_TWO_SIDED 2

#define SP_BOUND_BENNETT 0

#define SP_BOUND_BERNSTEIN1 1

#define SP_BOUND_BERNSTEIN2 2

/**
 * Status code returned by every fallible call.
 */
typedef enum {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_DOMAIN = 2,
  SP_STATUS_ARGUMENT = 3,
  SP_STATUS_RANGE = 4,
  SP_STATUS_PARSE = 5,
  SP_STATUS_NOT_A_NUMBER = 6,
  SP_STATUS_UNSUPPORTED = 7,
  SP_STATUS_IO = 8,
  SP_STATUS_INVALID_UTF8 = 9,
  SP_STATUS_PANIC = 10,
} SpStatus;

/**
 * Opaque handle to a parsed distribution.
 */
typedef struct SpDistribution SpDistribution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *sp_last_error(void);

/**
 * `phi(x) = e^x - 1 - x`.
 */
SpStatus sp_phi(double x, double *out);

/**
 * Principal branch of Lambert W on `[0, inf]`.
 */
SpStatus sp_lambert_w0(double x, double *out);

/**
 * Inverse of `h(u) = (1 + u) log(1 + u) - u`.
 */
SpStatus sp_h_inverse(double y, double *out);

/**
 * One-sided tail bound of kind `SP_BOUND_*` for proxy `sigma2` at `t`.
 */
SpStatus sp_bound(int32_t kind, double sigma2, double t, double *out);

/**
 * Parses a distribution descriptor such as `poisson(2)`.
 *
 * # Safety
 * `descriptor` must be null or a NUL-terminated string.
 */
SpStatus sp_distribution_parse(const char *descriptor, SpDistribution **out);

/**
 * Releases a handle from [`sp_distribution_parse`]. Null is ignored.
 *
 * # Safety
 * `d` must be null or a handle not yet freed.
 */
void sp_distribution_free(SpDistribution *d);

/**
 * Mean and variance.
 *
 * # Safety
 * `d` must be a live handle; `mean` and `variance` must be writable.
 */
SpStatus sp_distribution_moments(const SpDistribution *d, double *mean, double *variance);

/**
 * Optimal variance proxy on side `SP_SIDE_*`; `+inf` when none exists.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
SpStatus sp_optimal_proxy(const SpDistribution *d, int32_t side, double *out);

/**
 * Orlicz norm `psi_p` of `X - E X`; `+inf` when it does not exist.
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
SpStatus sp_psi_norm(const SpDistribution *d, double p, double *out);

/**
 * Full solver result as a JSON object. Free the string with
 * [`sp_string_free`].
 *
 * # Safety
 * `d` must be a live handle; `out` must be writable.
 */
SpStatus sp_proxy_json(const SpDistribution *d, int32_t side, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void sp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBPOISSON_H */
