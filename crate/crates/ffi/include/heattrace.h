#ifndef HEATTRACE_H
#define HEATTRACE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Classical group families; functions take these as `uint32_t` codes.
typedef enum HtFamily {
  // The full unitary group U(N).
  HT_FAMILY_A_PRIME = 0,
  HT_FAMILY_A = 1,
  HT_FAMILY_B = 2,
  HT_FAMILY_C = 3,
  HT_FAMILY_D = 4,
} HtFamily;

// Result codes shared by all functions.
typedef enum HtStatus {
  HT_STATUS_OK = 0,
  // An argument lies outside the mathematical domain (e.g. `t <= 0`).
  HT_STATUS_DOMAIN = 1,
  // An argument is malformed (wrong size for the family, bad label, ...).
  HT_STATUS_VALIDATION = 2,
  HT_STATUS_CUTOFF_TOO_SMALL = 3,
  // The request needs more work or memory than the library allows.
  HT_STATUS_RESOURCE = 4,
  HT_STATUS_CONVERGENCE = 5,
  HT_STATUS_NULL_POINTER = 6,
  // The output buffer is too small; the required size was reported.
  HT_STATUS_BUFFER_TOO_SMALL = 7,
  HT_STATUS_PANIC = 8,
} HtStatus;

// Opaque table of exact Hurwitz numbers.
typedef struct HtHurwitzTable HtHurwitzTable;

// Opaque heat-trace request.
typedef struct HtTraceRequest HtTraceRequest;

// A value `hi + lo` with a rigorous bound on the discarded tail.
typedef struct HtCertified {
  double hi;
  double lo;
  double tail_bound;
  size_t cutoff;
} HtCertified;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *ht_last_error(void);

// Library version as a static NUL-terminated string.
const char *ht_version(void);

// Creates a request for the heat trace of `family` at matrix size `n`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
enum HtStatus ht_trace_request_new(uint32_t family_code,
                                   uint32_t n,
                                   double t,
                                   double tol,
                                   struct HtTraceRequest **out);

// Releases a request; null is ignored.
//
// # Safety
// `req` must come from [`ht_trace_request_new`] and not be freed twice.
void ht_trace_request_free(struct HtTraceRequest *req);

// Evaluates the certified heat trace.
//
// # Safety
// `req` must be a live handle and `out` a valid pointer.
enum HtStatus ht_trace_evaluate(const struct HtTraceRequest *req, struct HtCertified *out);

// Large-N limit of the heat trace.
//
// # Safety
// `out` must be a valid pointer.
enum HtStatus ht_limit_trace(uint32_t family_code, double t, struct HtCertified *out);

// Coefficient of `N^{-k}` in the large-N expansion, to absolute tolerance `tol`.
//
// # Safety
// `out` must be a valid pointer.
enum HtStatus ht_expansion_coefficient(uint32_t family_code,
                                       double t,
                                       uint32_t k,
                                       double tol,
                                       struct HtCertified *out);

// Builds the exact Hurwitz numbers for `1 <= n <= n_max`, even `k <= k_max`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
enum HtStatus ht_hurwitz_table_new(uint32_t n_max, uint32_t k_max, struct HtHurwitzTable **out);

// Releases a table; null is ignored.
//
// # Safety
// `table` must come from [`ht_hurwitz_table_new`] and not be freed twice.
void ht_hurwitz_table_free(struct HtHurwitzTable *table);

// Writes `H_1(n, k)` as NUL-terminated decimal text into `buf`.
// `needed` (optional) receives the required buffer size including the NUL.
//
// # Safety
// `table` must be a live handle; `buf` must point to `len` writable bytes
// (it may be null when `len` is 0); `needed` may be null.
enum HtStatus ht_hurwitz_table_get(const struct HtHurwitzTable *table,
                                   uint32_t n,
                                   uint32_t k,
                                   char *buf,
                                   size_t len,
                                   size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEATTRACE_H */
