#ifndef QCLT_H
#define QCLT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum QcltStatus {
  QCLT_STATUS_OK = 0,
  QCLT_STATUS_NULL_POINTER = 1,
  QCLT_STATUS_INVALID_UTF8 = 2,
  QCLT_STATUS_PARSE = 3,
  QCLT_STATUS_INVALID_ARGUMENT = 4,
  QCLT_STATUS_MISSING_MOMENT = 5,
  QCLT_STATUS_NOT_NORMALIZED = 6,
  QCLT_STATUS_DIMENSION_MISMATCH = 7,
  QCLT_STATUS_ILL_CONDITIONED = 8,
  QCLT_STATUS_PANIC = 9,
} QcltStatus;

typedef enum QcltKind {
  QCLT_KIND_TENSOR = 0,
  QCLT_KIND_FREE = 1,
  QCLT_KIND_BOOLEAN = 2,
  QCLT_KIND_MONOTONE = 3,
} QcltKind;

/**
 * A single-site moment table.
 */
typedef struct QcltDistribution QcltDistribution;

/**
 * A truncated q²-CCR model.
 */
typedef struct QcltQccrModel QcltQccrModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the last error message on this thread, or null if none.
 * Release with [`qclt_string_free`].
 */
char *qclt_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed at most once.
 */
void qclt_string_free(char *s);

/**
 * The symmetric ±1 coin with moments up to `max_degree`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QcltStatus qclt_distribution_bernoulli(size_t max_degree, struct QcltDistribution **out);

/**
 * Parses a distribution from TOML text (`[adjoints]` and `[moments]` tables).
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QcltStatus qclt_distribution_from_toml(const char *toml, struct QcltDistribution **out);

/**
 * # Safety
 * `d` must be null or a handle from this library, freed at most once.
 */
void qclt_distribution_free(struct QcltDistribution *d);

/**
 * Limit moment as an exact string (`"p/q"`, complex as `"a+bi"`) and its real part.
 *
 * # Safety
 * Pointers must be valid; `labels` may be null.
 */
enum QcltStatus qclt_limit_moment(enum QcltKind kind,
                                  const struct QcltDistribution *dist,
                                  const char *labels,
                                  size_t n,
                                  char **out_exact,
                                  double *out_approx);

/**
 * `φ(S_N^{(j_1)} ⋯ S_N^{(j_n)})`; odd degrees may render as `"c/sqrt(N)"`.
 *
 * # Safety
 * Pointers must be valid; `labels` may be null.
 */
enum QcltStatus qclt_finite_n_moment(enum QcltKind kind,
                                     const struct QcltDistribution *dist,
                                     const char *labels,
                                     size_t n,
                                     uint64_t size,
                                     char **out_exact,
                                     double *out_approx);

/**
 * `Σ_π q^{cr(π)}` over pair partitions of `[n]`, rendered as a polynomial.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QcltStatus qclt_q_limit_moment(size_t n, char **out);

/**
 * # Safety
 * `q` must be a NUL-terminated rational such as `"1/2"`; `out` a valid pointer.
 */
enum QcltStatus qclt_qccr_build(const char *q, size_t depth, struct QcltQccrModel **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, freed at most once.
 */
void qclt_qccr_free(struct QcltQccrModel *m);

/**
 * Interior residual of `αα* − q²α*α − (1 − q²)` in operator norm.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QcltStatus qclt_qccr_residual(const struct QcltQccrModel *m, double *out);

/**
 * Projection idempotence, `‖Γ − Σ_{k≤K} E_k q^{2k}‖` and the tail bound `q^{2(K+1)}`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum QcltStatus qclt_qccr_reconstruct(const struct QcltQccrModel *m,
                                      size_t k_max,
                                      double *out_idempotence,
                                      double *out_error,
                                      double *out_bound);

/**
 * Runs the command line with `argv` (including the program name) and returns
 * its exit code; standard output is captured into `out_stdout`.
 *
 * # Safety
 * `argv` must point to `argc` NUL-terminated strings; `out_stdout` must be valid.
 */
enum QcltStatus qclt_cli_run(int argc,
                             const char *const *argv,
                             char **out_stdout,
                             int *out_exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCLT_H */
