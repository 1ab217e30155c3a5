#ifndef JUNTA_H
#define JUNTA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  JUNTA_STATUS_OK = 0,
  JUNTA_STATUS_NULL_POINTER = 1,
  JUNTA_STATUS_INVALID_ARGUMENT = 2,
  JUNTA_STATUS_DOMAIN = 3,
  JUNTA_STATUS_SIZE_LIMIT = 4,
  JUNTA_STATUS_CONSTANT_FUNCTION = 5,
  JUNTA_STATUS_NOT_FOUND = 6,
  JUNTA_STATUS_BUFFER_TOO_SMALL = 7,
  JUNTA_STATUS_PARSE = 8,
  JUNTA_STATUS_IO = 9,
  JUNTA_STATUS_PANIC = 10,
} JuntaStatus;

/**
 * Outcome of a learning run.
 */
typedef enum {
  JUNTA_LEARN_STATUS_EXACT_SUCCESS = 0,
  JUNTA_LEARN_STATUS_CONSTANT_FUNCTION = 1,
  JUNTA_LEARN_STATUS_BUDGET_EXHAUSTED = 2,
  JUNTA_LEARN_STATUS_INCONSISTENT = 3,
  JUNTA_LEARN_STATUS_K_BOUND_EXCEEDED = 4,
  JUNTA_LEARN_STATUS_NO_COEFFICIENT_FOUND = 5,
} JuntaLearnStatus;

/**
 * Opaque junta handle.
 */
typedef struct JuntaHandle JuntaHandle;

/**
 * Opaque learning-report handle.
 */
typedef struct JuntaReport JuntaReport;

/**
 * Learner settings. A non-positive `threshold` and a zero
 * `samples_per_coeff` or `attempt_budget` select the defaults.
 */
typedef struct {
  size_t k;
  size_t s;
  double alpha;
  double gamma;
  double delta;
  double threshold;
  uint64_t samples_per_coeff;
  uint64_t attempt_budget;
  bool unknown_biases;
} JuntaLearnOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the thread's last error message (nul-terminated, truncated to
 * `cap`) into `buf`; returns the full message length, 0 if none.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t junta_last_error(char *buf, size_t cap);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void junta_string_free(char *s);

/**
 * Parses the JSON form `{"n", "relevant", "core"}`.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
JuntaStatus junta_from_json(const char *json, JuntaHandle **out);

/**
 * Random junta on `n` variables with `k` listed relevant coordinates.
 *
 * # Safety
 * `out` must be writable.
 */
JuntaStatus junta_random(size_t n, size_t k, uint64_t seed, bool nonconstant, JuntaHandle **out);

/**
 * # Safety
 * `h` must be null or a handle from this library, not yet freed.
 */
void junta_free(JuntaHandle *h);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
JuntaStatus junta_to_json(const JuntaHandle *h, char **out);

/**
 * Number of variables, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t junta_n(const JuntaHandle *h);

/**
 * Number of listed relevant coordinates, 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t junta_k(const JuntaHandle *h);

/**
 * Evaluates at `x` (`len` signs).
 *
 * # Safety
 * `x` must be valid for `len` reads; `out` must be writable.
 */
JuntaStatus junta_eval(const JuntaHandle *h, const int8_t *x, size_t len, int8_t *out);

/**
 * Coefficient of `χ_S` under the uniform bias `r` on every coordinate.
 *
 * # Safety
 * `subset` must be valid for `len` reads; `out` must be writable.
 */
JuntaStatus junta_biased_coefficient(const JuntaHandle *h,
                                     const size_t *subset,
                                     size_t len,
                                     double r,
                                     double *out);

/**
 * Sum of squared level-`s` coefficients at bias `r`.
 *
 * # Safety
 * `out` must be writable.
 */
JuntaStatus junta_level_weight(const JuntaHandle *h, size_t s, double r, double *out);

/**
 * Absolute gap between both sides of the `s`-th order Russo identity at `r`.
 *
 * # Safety
 * `out` must be writable.
 */
JuntaStatus junta_russo_residual(const JuntaHandle *h, size_t s, double r, double *out);

/**
 * Critical biases of level `s`: writes up to `cap` real parts and
 * multiplicities and the full count to `count`. Returns `BufferTooSmall`
 * (with `count` set) when `cap` is short.
 *
 * # Safety
 * `re` and `multiplicity` must be valid for `cap` writes (or null when
 * `cap` is 0); `count` must be writable.
 */
JuntaStatus junta_root_set(const JuntaHandle *h,
                           size_t s,
                           double *re,
                           size_t *multiplicity,
                           size_t cap,
                           size_t *count);

/**
 * Learns `h` from simulated oracles at `biases`, oracle `j` seeded from
 * `(seed, j)`.
 *
 * # Safety
 * `biases` must be valid for `t` reads; `options` must point to a valid
 * struct; `out` must be writable.
 */
JuntaStatus junta_learn(const JuntaHandle *h,
                        const double *biases,
                        size_t t,
                        const JuntaLearnOptions *options,
                        uint64_t seed,
                        JuntaReport **out);

/**
 * # Safety
 * `r` must be null or a report from this library, not yet freed.
 */
void junta_report_free(JuntaReport *r);

/**
 * # Safety
 * `r` must be a live report; `out` must be writable.
 */
JuntaStatus junta_report_status(const JuntaReport *r, JuntaLearnStatus *out);

/**
 * Writes up to `cap` found variables and the full count to `count`.
 *
 * # Safety
 * `buf` must be valid for `cap` writes (or null when `cap` is 0); `count`
 * must be writable.
 */
JuntaStatus junta_report_relevant(const JuntaReport *r, size_t *buf, size_t cap, size_t *count);

/**
 * The report as JSON.
 *
 * # Safety
 * `r` must be a live report; `out` must be writable.
 */
JuntaStatus junta_report_to_json(const JuntaReport *r, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JUNTA_H */
