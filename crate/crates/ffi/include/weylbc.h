#ifndef WEYLBC_H
#define WEYLBC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Solver selection for [`weylbc_amplitude_solve`].
 */
typedef enum WeylbcMethod {
  WEYLBC_METHOD_MARCH = 0,
  WEYLBC_METHOD_NEUMANN = 1,
} WeylbcMethod;

/*
 Result of every fallible call.
 */
typedef enum WeylbcStatus {
  WEYLBC_STATUS_OK = 0,
  WEYLBC_STATUS_NULL_POINTER = 1,
  /*
   Bad input: malformed potential, step/extent mismatch, alignment.
   */
  WEYLBC_STATUS_CONFIG = 2,
  /*
   Solver breakdown: degenerate step, divergent series, blow-up.
   */
  WEYLBC_STATUS_SOLVER = 3,
  /*
   Outside the verified domain, e.g. below the convergence threshold.
   */
  WEYLBC_STATUS_DOMAIN = 4,
  WEYLBC_STATUS_BUFFER_TOO_SMALL = 5,
  WEYLBC_STATUS_PANIC = 6,
} WeylbcStatus;

typedef struct WeylbcAmplitude WeylbcAmplitude;

typedef struct WeylbcPotential WeylbcPotential;

/*
 `m(-k²)` with its error certificates.
 */
typedef struct WeylbcMEvaluation {
  double re_k;
  double im_k;
  double re_m;
  double im_m;
  double alpha_max;
  double quadrature_estimate;
  /*
   Infinite when evaluated below the convergence threshold.
   */
  double tail_bound;
} WeylbcMEvaluation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *weylbc_version(void);

/*
 Copies the last error message of this thread into `buffer` (truncated,
 always NUL-terminated when `capacity > 0`). Returns the full message
 length excluding the terminator.

 # Safety
 `buffer` must be valid for `capacity` bytes or null.
 */
size_t weylbc_last_error(char *buffer, size_t capacity);

/*
 `2·max{√(2‖q‖), e‖q‖}`.
 */
double weylbc_convergence_threshold(double norm_q);

/*
 Parses a potential from its JSON description.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum WeylbcStatus weylbc_potential_from_json(const char *json, struct WeylbcPotential **out);

/*
 # Safety
 `potential` must come from [`weylbc_potential_from_json`] or be null.
 */
void weylbc_potential_free(struct WeylbcPotential *potential);

/*
 Unit-window norm `sup ∫ₓ^{x+1} |q|`.

 # Safety
 Pointers must be valid.
 */
enum WeylbcStatus weylbc_potential_norm(const struct WeylbcPotential *potential, double *out);

/*
 `q(x)`, right-continuous at jumps.

 # Safety
 Pointers must be valid.
 */
enum WeylbcStatus weylbc_potential_eval(const struct WeylbcPotential *potential,
                                        double x,
                                        double *out);

/*
 Solves for the A-amplitude on `[0, x_max]` with step `step`.

 # Safety
 Pointers must be valid.
 */
enum WeylbcStatus weylbc_amplitude_solve(const struct WeylbcPotential *potential,
                                         double x_max,
                                         double step,
                                         enum WeylbcMethod method,
                                         double tol,
                                         struct WeylbcAmplitude **out);

/*
 # Safety
 `amplitude` must come from [`weylbc_amplitude_solve`] or be null.
 */
void weylbc_amplitude_free(struct WeylbcAmplitude *amplitude);

/*
 Number of samples, `n + 1`; 0 for a null handle.

 # Safety
 `amplitude` must be valid or null.
 */
size_t weylbc_amplitude_len(const struct WeylbcAmplitude *amplitude);

/*
 Grid step; NaN for a null handle.

 # Safety
 `amplitude` must be valid or null.
 */
double weylbc_amplitude_step(const struct WeylbcAmplitude *amplitude);

/*
 Copies `A(j·h)` into `buffer`.

 # Safety
 `buffer` must hold `capacity` doubles; `written` may be null.
 */
enum WeylbcStatus weylbc_amplitude_copy(const struct WeylbcAmplitude *amplitude,
                                        double *buffer,
                                        size_t capacity,
                                        size_t *written);

/*
 Copies the exponential bound on `|A - q|` at each node.

 # Safety
 As [`weylbc_amplitude_copy`].
 */
enum WeylbcStatus weylbc_amplitude_copy_bound(const struct WeylbcAmplitude *amplitude,
                                              double *buffer,
                                              size_t capacity,
                                              size_t *written);

/*
 Copies the response kernel `r(j·h_t)`, `h_t = 2h`.

 # Safety
 As [`weylbc_amplitude_copy`].
 */
enum WeylbcStatus weylbc_response_kernel_copy(const struct WeylbcAmplitude *amplitude,
                                              double *buffer,
                                              size_t capacity,
                                              size_t *written);

/*
 Evaluates `m(-k²)`. A positive `tail_tol` truncates at the shortest
 extent whose tail bound meets it; otherwise the whole grid is used.

 # Safety
 Pointers must be valid.
 */
enum WeylbcStatus weylbc_m_from_amplitude(const struct WeylbcAmplitude *amplitude,
                                          const struct WeylbcPotential *potential,
                                          double re_k,
                                          double im_k,
                                          double tail_tol,
                                          bool allow_unverified,
                                          struct WeylbcMEvaluation *out);

/*
 Reference `m(-k²)` by backward Riccati integration with RK4 step `step`.

 # Safety
 Pointers must be valid.
 */
enum WeylbcStatus weylbc_m_riccati(const struct WeylbcPotential *potential,
                                   double re_k,
                                   double im_k,
                                   double step,
                                   double *re_m,
                                   double *im_m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEYLBC_H */
