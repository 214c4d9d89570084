#ifndef SLOCC_LAB_H
#define SLOCC_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SlStatus {
  SlStatus_Ok = 0,
  SlStatus_NullPointer = 1,
  SlStatus_InvalidArgument = 2,
  SlStatus_Parse = 3,
  SlStatus_BudgetExceeded = 4,
  SlStatus_VerificationFailed = 5,
  SlStatus_Internal = 6,
} SlStatus;

/**
 * Opaque tensor handle.
 */
typedef struct SlTensor SlTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *sl_last_error(void);

/**
 * GHZ_level on `parties` parties.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_tensor_ghz(uintptr_t level, uintptr_t parties, struct SlTensor **out);

/**
 * W state on `parties` parties.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_tensor_w(uintptr_t parties, struct SlTensor **out);

/**
 * Dicke state: symmetrization of |0^zeros 1^ones⟩.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_tensor_dicke(uintptr_t zeros, uintptr_t ones, struct SlTensor **out);

/**
 * Parses a tensor file.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum SlStatus sl_tensor_from_json(const char *json, struct SlTensor **out);

/**
 * Serializes a tensor; free the string with `sl_string_free`.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum SlStatus sl_tensor_to_json(const struct SlTensor *t, char **out);

/**
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum SlStatus sl_tensor_parties(const struct SlTensor *t, uintptr_t *out);

/**
 * Number of nonzero entries.
 *
 * # Safety
 * `t` must be a live handle and `out` valid for writes.
 */
enum SlStatus sl_tensor_support_size(const struct SlTensor *t, uintptr_t *out);

/**
 * Rank of the flattening grouping `sites[0..len]` against the rest.
 *
 * # Safety
 * `t` must be a live handle, `sites` valid for `len` reads and `out` valid
 * for writes.
 */
enum SlStatus sl_tensor_flattening_rank(const struct SlTensor *t,
                                        const uintptr_t *sites,
                                        uintptr_t len,
                                        uintptr_t *out);

/**
 * Whether two tensors are exactly equal (same domain, shape and entries).
 *
 * # Safety
 * Both handles must be live and `out` valid for writes.
 */
enum SlStatus sl_tensor_equal(const struct SlTensor *a, const struct SlTensor *b, bool *out);

/**
 * Releases a tensor handle; NULL is ignored.
 *
 * # Safety
 * `t` must come from this library and not be used afterwards.
 */
void sl_tensor_free(struct SlTensor *t);

/**
 * Releases a string returned by this library; NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void sl_string_free(char *s);

/**
 * Builds and verifies the GHZ_2 to W_k certificate, reporting the measured
 * leading and error degrees. Returns `VerificationFailed` if it does not
 * verify.
 *
 * # Safety
 * `d` and `e` must be valid for writes.
 */
enum SlStatus sl_w_certificate_verify(uintptr_t parties, uintptr_t *d, uintptr_t *e);

/**
 * 1 / h(1/k).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SlStatus sl_w_ghz_rate(uintptr_t parties, double *out);

/**
 * One run of the W-to-GHZ hashing protocol with default parameters.
 *
 * # Safety
 * `ghz_level` and `rate` must be valid for writes.
 */
enum SlStatus sl_cw_run(uintptr_t k,
                        uintptr_t n,
                        uint64_t seed,
                        uintptr_t *ghz_level,
                        double *rate);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLOCC_LAB_H */
