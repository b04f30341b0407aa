#ifndef CSSKIT_H
#define CSSKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CsskitStatus {
  CSSKIT_STATUS_OK = 0,
  CSSKIT_STATUS_NULL_POINTER = 1,
  CSSKIT_STATUS_INVALID_ARGUMENT = 2,
  CSSKIT_STATUS_PARSE = 3,
  CSSKIT_STATUS_INVALID_STATE = 4,
  CSSKIT_STATUS_INVALID_CSS = 5,
  CSSKIT_STATUS_DEGENERATE_INPUT = 6,
  CSSKIT_STATUS_NUMERICAL = 7,
  CSSKIT_STATUS_PANIC = 8,
} CsskitStatus;

// Output of the closest-separable-state solver.
typedef struct CsskitResult CsskitResult;

// A validated density matrix with its subsystem dimensions.
typedef struct CsskitState CsskitState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null if the last call
// succeeded. Free with `csskit_string_free`.
char *csskit_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void csskit_string_free(char *s);

// Parses a JSON state file body (`{"dims": [...], "matrix": [[[re, im], ...], ...]}`).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum CsskitStatus csskit_state_from_json(const char *json, struct CsskitState **out);

// Built-in state by name: `bell`, `ghz`, `w`, `werner(p)`, `max_mixed(2x3)`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum CsskitStatus csskit_state_named(const char *name, struct CsskitState **out);

// Serializes a state to JSON. Free the string with `csskit_string_free`.
//
// # Safety
// `state` must be a live handle; `out` must be writable.
enum CsskitStatus csskit_state_to_json(const struct CsskitState *state, char **out);

// Total Hilbert-space dimension, or 0 for a null handle.
//
// # Safety
// `state` must be null or a live handle.
size_t csskit_state_dim(const struct CsskitState *state);

// # Safety
// `state` must be null or a handle from this library, not yet freed.
void csskit_state_free(struct CsskitState *state);

// Closest separable (PPT) state across the cut whose side A holds the
// `side_a_len` subsystem indices at `side_a`; `side_a_len == 0` means
// subsystem 0 against the rest.
//
// # Safety
// `state` must be a live handle, `side_a` must point to `side_a_len`
// indices (or be null when the length is 0), `out` must be writable.
enum CsskitStatus csskit_closest_separable(const struct CsskitState *state,
                                           const size_t *side_a,
                                           size_t side_a_len,
                                           double tol,
                                           struct CsskitResult **out);

// # Safety
// `result` must be a live handle; `out` must be writable.
enum CsskitStatus csskit_result_distance_sq(const struct CsskitResult *result, double *out);

// 1 when PPT certifies separability for this cut (2×2, 2×3), else 0.
//
// # Safety
// `result` must be a live handle; `out` must be writable.
enum CsskitStatus csskit_result_is_certified(const struct CsskitResult *result, int32_t *out);

// The closest state as a JSON state file body. Free with `csskit_string_free`.
//
// # Safety
// `result` must be a live handle; `out` must be writable.
enum CsskitStatus csskit_result_css_json(const struct CsskitResult *result, char **out);

// # Safety
// `result` must be null or a handle from this library, not yet freed.
void csskit_result_free(struct CsskitResult *result);

// Σ|λ| over the negative eigenvalues of the partial transpose.
//
// # Safety
// As for `csskit_closest_separable`.
enum CsskitStatus csskit_negativity(const struct CsskitState *state,
                                    const size_t *side_a,
                                    size_t side_a_len,
                                    double *out);

// Spectral lower bound on the squared distance to the PPT set.
//
// # Safety
// As for `csskit_closest_separable`.
enum CsskitStatus csskit_lower_bound(const struct CsskitState *state,
                                     const size_t *side_a,
                                     size_t side_a_len,
                                     double *out);

// Squared Hilbert-Schmidt distance to the closest PPT state.
//
// # Safety
// As for `csskit_closest_separable`.
enum CsskitStatus csskit_min_hsd(const struct CsskitState *state,
                                 const size_t *side_a,
                                 size_t side_a_len,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CSSKIT_H */
