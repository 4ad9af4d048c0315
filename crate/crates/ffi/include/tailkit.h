#ifndef TAILKIT_H
#define TAILKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum tk_seed {
  TK_SEED_PDF = 0,
  TK_SEED_SHIFTED_PDF = 1,
} tk_seed;

typedef enum tk_side {
  TK_SIDE_RIGHT = 0,
  TK_SIDE_LEFT = 1,
} tk_side;

typedef enum tk_status {
  TK_STATUS_OK = 0,
  TK_STATUS_NULL_POINTER = 1,
  TK_STATUS_DOMAIN = 2,
  TK_STATUS_PARAM = 3,
  TK_STATUS_POLE_ENCOUNTERED = 4,
  TK_STATUS_SEED_INCOMPATIBLE = 5,
  TK_STATUS_SEED_INVALID = 6,
  TK_STATUS_WINDOW_TOO_SMALL = 7,
  TK_STATUS_TOLERANCE_NOT_MET = 8,
  TK_STATUS_OUT_OF_VALIDITY = 9,
  TK_STATUS_BRACKET_FAILED = 10,
  TK_STATUS_MGF_DIVERGED = 11,
  TK_STATUS_JET_DIVISION = 12,
  TK_STATUS_JET_ORDER = 13,
  TK_STATUS_PANIC = 14,
} tk_status;

typedef enum tk_verdict {
  TK_VERDICT_UPPER = 0,
  TK_VERDICT_LOWER = 1,
  TK_VERDICT_EXACT = 2,
  TK_VERDICT_INVALID = 3,
} tk_verdict;

/**
 * Opaque AWGN configuration (n, Ω, ε).
 */
typedef struct tk_awgn tk_awgn;

/**
 * Opaque distribution handle.
 */
typedef struct tk_distribution tk_distribution;

/**
 * Opaque handle to one iterate P_i.
 */
typedef struct tk_iterate tk_iterate;

typedef struct tk_classification {
  enum tk_verdict verdict;
  /**
   * NaN when the verdict is invalid.
   */
  double threshold;
} tk_classification;

typedef struct tk_awgn_point {
  double lambda_p0;
  double lambda_p1;
  double lambda_asym;
  double r_lower;
  double r_upper;
  double r_asym;
  double r_na;
  double capacity;
} tk_awgn_point;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *tk_status_str(enum tk_status status);

/**
 * Copies the last error message of this thread into `buf`, NUL-terminated
 * and truncated to `len`. Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t tk_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum tk_status tk_distribution_gaussian(double mu, double sigma, struct tk_distribution **out);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum tk_status tk_distribution_beta_prime(double alpha, double beta, struct tk_distribution **out);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum tk_status tk_distribution_ncchi2(double k, double s, struct tk_distribution **out);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum tk_status tk_distribution_exponential(double rate, struct tk_distribution **out);

/**
 * # Safety
 * `dist` must be null or a handle from a `tk_distribution_*` constructor,
 * not yet freed.
 */
void tk_distribution_free(struct tk_distribution *dist);

/**
 * # Safety
 * `dist` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_distribution_log_pdf(const struct tk_distribution *dist, double x, double *out);

/**
 * ln of the reference tail 1 − F(x) (right) or F(x) (left).
 *
 * # Safety
 * `dist` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_oracle_ln_tail(const struct tk_distribution *dist,
                                 double x,
                                 enum tk_side side,
                                 double *out);

/**
 * The seed P_0. The distribution handle may be freed afterwards.
 *
 * # Safety
 * `dist` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_iterate_seed(const struct tk_distribution *dist,
                               enum tk_seed seed,
                               enum tk_side side,
                               struct tk_iterate **out);

/**
 * P_{i+1} from P_i, as a new handle.
 *
 * # Safety
 * `it` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_iterate_next(const struct tk_iterate *it, struct tk_iterate **out);

/**
 * # Safety
 * `it` must be null or a live iterate handle.
 */
void tk_iterate_free(struct tk_iterate *it);

/**
 * # Safety
 * `it` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_iterate_index(const struct tk_iterate *it, size_t *out);

/**
 * # Safety
 * `it` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_iterate_ln_value(const struct tk_iterate *it, double x, double *out);

/**
 * # Safety
 * `it` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_iterate_value(const struct tk_iterate *it, double x, double *out);

/**
 * Convergence rate R_i(x) of the pair (P_i, P_{i+1}).
 *
 * # Safety
 * `it` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_iterate_rate(const struct tk_iterate *it, double x, double *out);

/**
 * Classifies the iterate on [a, b] with a grid of `points` points in
 * geometric spacing (uniform when a ≤ 0).
 *
 * # Safety
 * `it` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_iterate_classify(const struct tk_iterate *it,
                                   double a,
                                   double b,
                                   size_t points,
                                   double tol,
                                   struct tk_classification *out);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum tk_status tk_awgn_new(uint64_t n, double omega, double eps, struct tk_awgn **out);

/**
 * # Safety
 * `cfg` must be null or a live AWGN handle.
 */
void tk_awgn_free(struct tk_awgn *cfg);

/**
 * # Safety
 * `cfg` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_awgn_bounds(const struct tk_awgn *cfg, struct tk_awgn_point *out);

/**
 * Converse rate from the series oracle. Cost grows with n.
 *
 * # Safety
 * `cfg` must be a live handle and `out` valid for one write.
 */
enum tk_status tk_awgn_oracle_converse(const struct tk_awgn *cfg, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAILKIT_H */
