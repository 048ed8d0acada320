#ifndef PUNCTLAB_H
#define PUNCTLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_UTF8 = 2,
  PL_STATUS_SYNTAX = 3,
  PL_STATUS_UNKNOWN_IDENTIFIER = 4,
  PL_STATUS_INDETERMINATE = 5,
  PL_STATUS_ESSENTIAL = 6,
  PL_STATUS_MISSING_PARAMETER = 7,
  PL_STATUS_OUTSIDE_DOMAIN = 8,
  PL_STATUS_INVALID_ARGUMENT = 9,
  PL_STATUS_NUMERICAL = 10,
  PL_STATUS_PANIC = 11,
} PlStatus;

// Opaque parsed expression.
typedef struct PlExpr PlExpr;

// A complex number.
typedef struct PlComplex {
  double re;
  double im;
} PlComplex;

// A point of the Riemann sphere; `value` is ignored when `infinite` is set.
typedef struct PlSpherePoint {
  bool infinite;
  struct PlComplex value;
} PlSpherePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *pl_last_error(void);

// Library version as a static nul-terminated string.
const char *pl_version(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void pl_string_free(char *s);

// Parse an expression in `z` (and optionally `k`).
//
// # Safety
// `text` must be a valid nul-terminated string and `out` writable.
enum PlStatus pl_expr_parse(const char *text, struct PlExpr **out);

// Free a handle from [`pl_expr_parse`]. Null is ignored.
//
// # Safety
// `expr` must be null or a live handle that is not used afterwards.
void pl_expr_free(struct PlExpr *expr);

// Value of the expression at `z`; `k` is used only when `has_k` is set.
//
// # Safety
// `expr` must be a live handle and `out` writable.
enum PlStatus pl_expr_eval(const struct PlExpr *expr,
                           struct PlComplex z,
                           bool has_k,
                           int64_t k,
                           struct PlSpherePoint *out);

// Spherical derivative `2|f'| / (1 + |f|^2)` at `z`.
//
// # Safety
// `expr` must be a live handle and `out` writable.
enum PlStatus pl_expr_spherical_derivative(const struct PlExpr *expr,
                                           struct PlComplex z,
                                           bool has_k,
                                           int64_t k,
                                           double *out);

// Chordal distance on the Riemann sphere.
double pl_chordal(struct PlSpherePoint p, struct PlSpherePoint q);

// Poincaré distance between `z` and `w` in `D(center, radius)`.
//
// # Safety
// `out` must be writable.
enum PlStatus pl_poincare_distance(struct PlComplex center,
                                   double radius,
                                   struct PlComplex z,
                                   struct PlComplex w,
                                   double *out);

// Hyperbolic distance in the punctured unit disk.
//
// # Safety
// `out` must be writable.
enum PlStatus pl_punctured_distance(struct PlComplex z, struct PlComplex w, double *out);

// Hyperbolic length of `|z| = r` in the punctured unit disk.
//
// # Safety
// `out` must be writable.
enum PlStatus pl_punctured_circle_length(double r, double *out);

// Chordal diameter of the image of `|z| = r`.
//
// # Safety
// `expr` must be a live handle and `out` writable.
enum PlStatus pl_diam_circle_image(const struct PlExpr *expr,
                                   double r,
                                   size_t samples,
                                   double *out);

// Estimate of the Lipschitz constant on `D(center, radius)`.
//
// # Safety
// `expr` must be a live handle and `out` writable.
enum PlStatus pl_lipschitz_estimate(const struct PlExpr *expr,
                                    bool has_k,
                                    int64_t k,
                                    struct PlComplex center,
                                    double radius,
                                    size_t budget,
                                    uint64_t seed,
                                    double *out);

// Normality test of the family on `D(center, radius)` over `ks`; writes the
// verdict as JSON.
//
// # Safety
// `expr` must be a live handle, `ks` must hold `n_ks` values and `out` be
// writable.
enum PlStatus pl_marty_json(const struct PlExpr *expr,
                            struct PlComplex center,
                            double radius,
                            const int64_t *ks,
                            size_t n_ks,
                            uint64_t seed,
                            char **out);

// Rescaling analysis at the singularity at 0 over decreasing `radii`;
// writes the full record as JSON.
//
// # Safety
// `expr` must be a live handle, `radii` must hold `n` values and `out` be
// writable.
enum PlStatus pl_rescale_json(const struct PlExpr *expr,
                              const double *radii,
                              size_t n,
                              uint64_t seed,
                              char **out);

// Witness search for non-extendability at 0; writes the outcome as JSON.
//
// # Safety
// `expr` must be a live handle, `radii` must hold `n` values and `out` be
// writable.
enum PlStatus pl_lv_json(const struct PlExpr *expr, const double *radii, size_t n, char **out);

// Growth profile of `|z| f#(z)` on circles; writes the profile as JSON.
//
// # Safety
// `expr` must be a live handle, `radii` must hold `n` values and `out` be
// writable.
enum PlStatus pl_julia_json(const struct PlExpr *expr, const double *radii, size_t n, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PUNCTLAB_H */
