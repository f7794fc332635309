#ifndef VARIND_H
#define VARIND_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum VarindStatus {
  VARIND_STATUS_OK = 0,
  VARIND_STATUS_NULL_POINTER = 1,
  VARIND_STATUS_INVALID_UTF8 = 2,
  // Malformed algebra or term text, or inconsistent tables.
  VARIND_STATUS_PARSE = 3,
  VARIND_STATUS_SIGNATURE_MISMATCH = 4,
  // A hypothesis of the requested method does not hold.
  VARIND_STATUS_PRECONDITION = 5,
  // Bad argument combination.
  VARIND_STATUS_USAGE = 6,
  VARIND_STATUS_LIMIT_EXCEEDED = 7,
  // The tuple coding space does not fit; use the fast method.
  VARIND_STATUS_CODING_OVERFLOW = 8,
  // Internal disagreement or failed self-check.
  VARIND_STATUS_INTERNAL = 9,
  VARIND_STATUS_PANIC = 10,
} VarindStatus;

typedef enum VarindMethod {
  VARIND_METHOD_AUTO = 0,
  VARIND_METHOD_FAST = 1,
  VARIND_METHOD_ORACLE = 2,
  VARIND_METHOD_BOTH = 3,
} VarindMethod;

typedef enum VarindVerdict {
  VARIND_VERDICT_INDEPENDENT = 0,
  VARIND_VERDICT_NOT_INDEPENDENT = 1,
  VARIND_VERDICT_INCONCLUSIVE = 2,
} VarindVerdict;

// A finite algebra.
typedef struct VarindAlgebra VarindAlgebra;

// The outcome of [`varind_decide`].
typedef struct VarindReport VarindReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread; do not free.
const char *varind_last_error(void);

// Library version as a static string.
const char *varind_version(void);

// Parses an algebra in the text format.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum VarindStatus varind_algebra_parse(const char *text, struct VarindAlgebra **out);

// Releases an algebra; null is ignored.
//
// # Safety
// `alg` must come from [`varind_algebra_parse`] and not be used afterwards.
void varind_algebra_free(struct VarindAlgebra *alg);

// Carrier size, or 0 for null.
//
// # Safety
// `alg` must be null or a live handle.
size_t varind_algebra_size(const struct VarindAlgebra *alg);

// Checks whether `term` is a `k`-edge term of `alg`; the answer goes to `out`.
//
// # Safety
// `alg` must be a live handle, `term` NUL-terminated, `out` writable.
enum VarindStatus varind_verify_edge_term(const struct VarindAlgebra *alg,
                                          const char *term,
                                          size_t k,
                                          bool *out);

// Decides whether `a` and `b` are independent.
//
// `edge_term` may be null; when given it must be a `k`-edge term of both.
// `limit` caps closure sizes (0 for the default). `threads` of 0 uses the
// global pool.
//
// # Safety
// `a`, `b` must be live handles, `edge_term` null or NUL-terminated, `out`
// writable.
enum VarindStatus varind_decide(const struct VarindAlgebra *a,
                                const struct VarindAlgebra *b,
                                enum VarindMethod method,
                                const char *edge_term,
                                size_t k,
                                size_t limit,
                                size_t threads,
                                struct VarindReport **out);

// Releases a report; null is ignored.
//
// # Safety
// `report` must come from [`varind_decide`] and not be used afterwards.
void varind_report_free(struct VarindReport *report);

// The verdict; null is reported as inconclusive.
//
// # Safety
// `report` must be null or a live handle.
enum VarindVerdict varind_report_verdict(const struct VarindReport *report);

// The method that produced the verdict, e.g. `fast-edge(3)`; owned string.
//
// # Safety
// `report` must be null or a live handle.
char *varind_report_method(const struct VarindReport *report);

// The witness term `t(x0, x1)`, or null when there is none; owned string.
//
// # Safety
// `report` must be null or a live handle.
char *varind_report_witness(const struct VarindReport *report);

// The counterexample `r=.. s=.. p=.. q=.. missing=..`, or null; owned string.
//
// # Safety
// `report` must be null or a live handle.
char *varind_report_counterexample(const struct VarindReport *report);

// Number of closures the fast sweep computed (0 for the oracle alone).
//
// # Safety
// `report` must be null or a live handle.
size_t varind_report_closures(const struct VarindReport *report);

// Members the oracle generated, or 0 if it did not run.
//
// # Safety
// `report` must be null or a live handle.
size_t varind_report_oracle_members(const struct VarindReport *report);

// Releases a string returned by this library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void varind_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VARIND_H */
