#ifndef BICTX_H
#define BICTX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BictxStatus {
  BICTX_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  BICTX_STATUS_NULL_POINTER = 1,
  /**
   * A mean, correlation or mixing weight passed as a number left [-1, 1]
   * (or [0, 1] for weights).
   */
  BICTX_STATUS_DOMAIN = 2,
  /**
   * Malformed JSON, inconsistent data or a violated precondition.
   */
  BICTX_STATUS_INVALID_INPUT = 3,
  /**
   * The report carries no witness (the behavior is bi-contextual).
   */
  BICTX_STATUS_NO_WITNESS = 4,
  /**
   * A bug in the library; the message has details.
   */
  BICTX_STATUS_INTERNAL = 5,
} BictxStatus;

typedef enum BictxVerdict {
  BICTX_VERDICT_NON_BI_CONTEXTUAL = 0,
  BICTX_VERDICT_BI_CONTEXTUAL = 1,
} BictxVerdict;

/**
 * Opaque behavior handle.
 */
typedef struct BictxBehavior BictxBehavior;

/**
 * Opaque decision report handle.
 */
typedef struct BictxReport BictxReport;

/**
 * Admissible intervals `[L_i, R_i]` of the per-source correlations.
 */
typedef struct BictxBounds {
  double l1;
  double r1;
  double l2;
  double r2;
} BictxBounds;

/**
 * Which of the four rectangle sides the hyperbola meets.
 */
typedef struct BictxSides {
  bool left;
  bool right;
  bool upper;
  bool lower;
} BictxSides;

/**
 * Factorized model: `mu1`/`mu2` are the cells `(+,+), (+,-), (-,+), (-,-)`
 * of each source's distribution over `(alpha_i, beta_i)`.
 */
typedef struct BictxWitness {
  double c1;
  double c2;
  double mu1[4];
  double mu2[4];
} BictxWitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none failed.
 * The string stays valid until the next failing call on the same thread.
 */
const char *bictx_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bictx_version(void);

/**
 * Creates a behavior from its five means.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum BictxStatus bictx_behavior_new(double alpha1,
                                    double alpha2,
                                    double beta1,
                                    double beta2,
                                    double corr_ab,
                                    struct BictxBehavior **out);

/**
 * Parses a behavior from JSON (`alpha1`, `alpha2`, `beta1`, `beta2`,
 * `corrAB`, optional `meanA`, `meanB`, `tables`). Any rejection, including
 * an out-of-range mean, is `BICTX_STATUS_INVALID_INPUT`.
 *
 * # Safety
 * `json` must be null or a NUL-terminated string; `out` must be null or
 * valid for writing one pointer.
 */
enum BictxStatus bictx_behavior_from_json(const char *json, struct BictxBehavior **out);

/**
 * Exact behavior of two copies of `cos(theta)|0> + sin(theta) e^{i phi}|1>`.
 * `theta` outside `[0, pi/2]` is `BICTX_STATUS_INVALID_INPUT`.
 *
 * # Safety
 * `out` must be null or valid for writing one pointer.
 */
enum BictxStatus bictx_behavior_ideal(double theta, double phi, struct BictxBehavior **out);

/**
 * `w * b1 + (1 - w) * b2`.
 *
 * # Safety
 * `b1` and `b2` must be null or live handles; `out` must be null or valid
 * for writing one pointer.
 */
enum BictxStatus bictx_behavior_mix(const struct BictxBehavior *b1,
                                    double w,
                                    const struct BictxBehavior *b2,
                                    struct BictxBehavior **out);

/**
 * Copies `(alpha1, alpha2, beta1, beta2, corrAB)` into `out[0..5]`.
 *
 * # Safety
 * `b` must be null or a live handle; `out` must be null or valid for
 * writing five doubles.
 */
enum BictxStatus bictx_behavior_moments(const struct BictxBehavior *b, double *out);

/**
 * Releases a behavior. Null is ignored.
 *
 * # Safety
 * `b` must be null or a handle not yet freed.
 */
void bictx_behavior_free(struct BictxBehavior *b);

/**
 * Runs the decision procedure; non-bi-contextual reports carry a witness.
 *
 * # Safety
 * `b` must be null or a live handle; `out` must be null or valid for
 * writing one pointer.
 */
enum BictxStatus bictx_decide(const struct BictxBehavior *b, struct BictxReport **out);

/**
 * # Safety
 * `r` must be null or a live handle; `out` must be null or writable.
 */
enum BictxStatus bictx_report_verdict(const struct BictxReport *r, enum BictxVerdict *out);

/**
 * `(<AB> - min)(<AB> - max)`, positive for bi-contextual behaviors.
 *
 * # Safety
 * `r` must be null or a live handle; `out` must be null or writable.
 */
enum BictxStatus bictx_report_single_lhs(const struct BictxReport *r, double *out);

/**
 * Smallest and largest corner product, written to `min` and `max`.
 *
 * # Safety
 * `r` must be null or a live handle; `min` and `max` must be null or writable.
 */
enum BictxStatus bictx_report_range(const struct BictxReport *r, double *min, double *max);

/**
 * # Safety
 * `r` must be null or a live handle; `out` must be null or writable.
 */
enum BictxStatus bictx_report_bounds(const struct BictxReport *r, struct BictxBounds *out);

/**
 * # Safety
 * `r` must be null or a live handle; `out` must be null or writable.
 */
enum BictxStatus bictx_report_sides(const struct BictxReport *r, struct BictxSides *out);

/**
 * Copies the witness model; `BICTX_STATUS_NO_WITNESS` for bi-contextual reports.
 *
 * # Safety
 * `r` must be null or a live handle; `out` must be null or writable.
 */
enum BictxStatus bictx_report_witness(const struct BictxReport *r, struct BictxWitness *out);

/**
 * The full report as JSON. Release the string with [`bictx_string_free`].
 *
 * # Safety
 * `r` must be null or a live handle; `out` must be null or valid for
 * writing one pointer.
 */
enum BictxStatus bictx_report_to_json(const struct BictxReport *r, char **out);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void bictx_report_free(struct BictxReport *r);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void bictx_string_free(char *s);

/**
 * Cells `(+,+), (+,-), (-,+), (-,-)` of the distribution with the given
 * means and correlation. `*valid` is false when a cell is negative; the
 * cells are written either way, so the negative one can be inspected.
 *
 * # Safety
 * `cells` must be null or valid for writing four doubles; `valid` must be
 * null or writable.
 */
enum BictxStatus bictx_pair_distribution(double mean_q,
                                         double mean_r,
                                         double corr,
                                         double *cells,
                                         bool *valid);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BICTX_H */
