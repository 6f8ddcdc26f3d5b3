#ifndef SLTRANSMUTE_H
#define SLTRANSMUTE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum SltStatus {
  SLT_STATUS_OK = 0,
  // A required pointer was null or a string was not UTF-8.
  SLT_STATUS_INVALID_ARGUMENT = 1,
  SLT_STATUS_CONFIG = 2,
  SLT_STATUS_CONSTRUCTION = 3,
  // Root finding failed or fewer eigenvalues than requested were found.
  SLT_STATUS_CONVERGENCE = 4,
  // Internal panic; the handle involved should be freed.
  SLT_STATUS_PANIC = 5,
} SltStatus;

typedef enum SltMode {
  SLT_MODE_AUTO = 0,
  SLT_MODE_REAL = 1,
  SLT_MODE_COMPLEX = 2,
} SltMode;

// Opaque problem handle.
typedef struct SltProblem SltProblem;

// Problem description. Null strings mean "not given"; zero sizes mean
// "default".
typedef struct SltProblemSpec {
  // e.g. `"paine1"`, `"coffey_evans(50)"`.
  const char *builtin;
  // Expression in `x`.
  const char *potential;
  // `"a,b"`.
  const char *interval;
  // `"dirichlet"`, `"neumann"` or `"alpha=..,beta=..[,kappa=..]"` in `omega`.
  const char *bc_left;
  const char *bc_right;
  size_t m;
  size_t n;
  size_t segments;
} SltProblemSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length.
//
// # Safety
// `buf` is null or points to `len` writable bytes.
size_t slt_last_error(char *buf, size_t len);

// Builds a problem; `*out` receives the handle on success.
//
// # Safety
// `spec` and `out` are valid pointers; the strings in `spec` are null or
// NUL terminated.
enum SltStatus slt_problem_new(const struct SltProblemSpec *spec, struct SltProblem **out);

// Releases a handle; null is ignored.
//
// # Safety
// `p` is null or a handle from [`slt_problem_new`] not yet freed.
void slt_problem_free(struct SltProblem *p);

// Achieved kernel fit errors.
//
// # Safety
// All pointers valid.
enum SltStatus slt_problem_eps(const struct SltProblem *p, double *eps1, double *eps2);

// `Φ_N(ω)`.
//
// # Safety
// All pointers valid.
enum SltStatus slt_char_function(const struct SltProblem *p,
                                 double omega_re,
                                 double omega_im,
                                 double *out_re,
                                 double *out_im);

// Up to `count` eigenvalues into `lambda_re[..]`, `lambda_im[..]`;
// `*found` is the number written. Well-type builtins return bound states
// (deepest first). Fewer than `count` gives [`SltStatus::Convergence`] with
// the found values still written.
//
// # Safety
// `lambda_re` and `lambda_im` hold `count` doubles; other pointers valid.
enum SltStatus slt_find_eigenvalues(const struct SltProblem *p,
                                    size_t count,
                                    enum SltMode mode,
                                    double *lambda_re,
                                    double *lambda_im,
                                    size_t *found);

// Solution of `y(a) = y0`, `y'(a) = y1` at `n` points `xs` given in the
// problem's own coordinates; values go to `y_re`, `y_im`.
//
// # Safety
// `xs`, `y_re` and `y_im` hold `n` doubles; `p` is valid.
enum SltStatus slt_solve_ivp(const struct SltProblem *p,
                             double lambda_re,
                             double lambda_im,
                             double y0_re,
                             double y0_im,
                             double y1_re,
                             double y1_im,
                             const double *xs,
                             size_t n,
                             double *y_re,
                             double *y_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLTRANSMUTE_H */
