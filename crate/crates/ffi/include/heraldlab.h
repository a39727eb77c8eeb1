#ifndef HERALDLAB_H
#define HERALDLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_UTF8 = 2,
  HL_STATUS_INVALID_ARGUMENT = 3,
  HL_STATUS_NOT_NORMALIZED = 4,
  HL_STATUS_UNKNOWN_MODE = 5,
  HL_STATUS_MODE_COLLISION = 6,
  HL_STATUS_ZERO_NORM = 7,
  HL_STATUS_PARSE_ERROR = 8,
  HL_STATUS_SEMANTIC_ERROR = 9,
  HL_STATUS_RUNTIME = 10,
  HL_STATUS_PANIC = 11,
} HlStatus;

/**
 * Opaque density matrix.
 */
typedef struct HlDensity HlDensity;

/**
 * Opaque pure state.
 */
typedef struct HlState HlState;

typedef struct HlComplex {
  double re;
  double im;
} HlComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hl_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void hl_string_free(char *s);

/**
 * `alpha|H> + beta|V>` in `mode`.
 *
 * # Safety
 * `mode` must be a NUL-terminated string; `out` must be writable.
 */
enum HlStatus hl_state_single_photon(const char *mode,
                                     struct HlComplex alpha,
                                     struct HlComplex beta,
                                     struct HlState **out);

/**
 * # Safety
 * `a`, `b` must be live handles; `out` must be writable.
 */
enum HlStatus hl_state_tensor(const struct HlState *a,
                              const struct HlState *b,
                              struct HlState **out);

/**
 * Polarizing beam splitter with reflection phase +1: `H` of `in_a` goes to `out_b`,
 * `H` of `in_b` to `out_a`, `V` stays on its side.
 *
 * # Safety
 * `s` must be a live handle, labels NUL-terminated strings, `out` writable.
 */
enum HlStatus hl_state_pbs(const struct HlState *s,
                           const char *in_a,
                           const char *in_b,
                           const char *out_a,
                           const char *out_b,
                           struct HlState **out);

/**
 * Ideal one-photon herald on `mode`. Writes the success probability and the
 * normalized success state, or null when the probability is zero.
 *
 * # Safety
 * `s` must be a live handle, `mode` a NUL-terminated string, outputs writable.
 */
enum HlStatus hl_state_herald(const struct HlState *s,
                              const char *mode,
                              struct HlState **out_state,
                              double *out_probability);

/**
 * # Safety
 * `s` must be a live handle; `out` writable.
 */
enum HlStatus hl_state_norm_sqr(const struct HlState *s, double *out);

/**
 * `|<a|b>|^2`; both states must live on the same modes.
 *
 * # Safety
 * `a`, `b` must be live handles; `out` writable.
 */
enum HlStatus hl_state_overlap(const struct HlState *a, const struct HlState *b, double *out);

/**
 * Canonical JSON list of `{ket, re, im}` terms.
 *
 * # Safety
 * `s` must be a live handle; `out` writable. Free the result with `hl_string_free`.
 */
enum HlStatus hl_state_to_json(const struct HlState *s, char **out);

/**
 * # Safety
 * `s` must be null or a handle from this library that has not been freed.
 */
void hl_state_free(struct HlState *s);

/**
 * `f|H><H| + (1-f)|V><V|` in `mode`.
 *
 * # Safety
 * `mode` must be a NUL-terminated string; `out` writable.
 */
enum HlStatus hl_density_dephased(const char *mode, double f, struct HlDensity **out);

/**
 * One purification round on two copies of `rho`. Writes the corrected output
 * state, its `|H>` fraction and the two-mode selection probability.
 *
 * # Safety
 * `rho` must be a live handle; outputs writable.
 */
enum HlStatus hl_purify_round(const struct HlDensity *rho,
                              struct HlDensity **out_state,
                              double *out_f,
                              double *out_selection_probability);

/**
 * # Safety
 * `rho` must be a live handle; `out` writable. Free the result with `hl_string_free`.
 */
enum HlStatus hl_density_to_json(const struct HlDensity *rho, char **out);

/**
 * # Safety
 * `rho` must be null or a handle from this library that has not been freed.
 */
void hl_density_free(struct HlDensity *rho);

/**
 * Two-photon entangler: sources on modes `1`, `2`, herald on `1'`.
 *
 * # Safety
 * Outputs must be writable.
 */
enum HlStatus hl_protocol_entangle_two(struct HlComplex alpha1,
                                       struct HlComplex beta1,
                                       struct HlComplex alpha2,
                                       struct HlComplex beta2,
                                       struct HlState **out_state,
                                       double *out_probability);

/**
 * `n`-photon chain with identical sources `alpha|H> + beta|V>`.
 *
 * # Safety
 * Outputs must be writable.
 */
enum HlStatus hl_protocol_chain(size_t n,
                                struct HlComplex alpha,
                                struct HlComplex beta,
                                struct HlState **out_state,
                                double *out_probability);

/**
 * Purification trajectory from `f` as a versioned JSON report.
 *
 * # Safety
 * `out` must be writable. Free the result with `hl_string_free`.
 */
enum HlStatus hl_purify_trajectory_json(double f, size_t rounds, char **out);

/**
 * Runs a circuit script. `shots <= 0` skips Monte Carlo sampling. On parse or
 * semantic errors the status says which pass failed and the last-error
 * message lists every `line:column: message`, one per line.
 *
 * # Safety
 * `script` must be a NUL-terminated string; `out` writable. Free the result with `hl_string_free`.
 */
enum HlStatus hl_simulate_script(const char *script, int64_t shots, uint64_t seed, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HERALDLAB_H */
