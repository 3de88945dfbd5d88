#ifndef NCM_H
#define NCM_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NcmStatus {
  NCM_STATUS_OK = 0,
  NCM_STATUS_NULL_ARGUMENT = 1,
  NCM_STATUS_INVALID_UTF8 = 2,
  NCM_STATUS_PARSE = 3,
  NCM_STATUS_INPUT = 4,
  NCM_STATUS_DIMENSION_MISMATCH = 5,
  NCM_STATUS_NOT_POSITIVE_DEFINITE = 6,
  NCM_STATUS_NUMERIC = 7,
  NCM_STATUS_IO = 8,
} NcmStatus;

/**
 * Opaque model handle.
 */
typedef struct NcmModel NcmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ncm_last_error(void);

/**
 * Parses a model file's text into a new handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NcmStatus ncm_model_from_toml(const char *text, struct NcmModel **out);

/**
 * Loads a model file from disk.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NcmStatus ncm_model_load(const char *path, struct NcmModel **out);

/**
 * Builds a model from samples and intervals given as CSV text.
 *
 * `variant` is one of `me`, `mp1`, `mp2`, `rect`, `ltri`, `utri`; `method`
 * is `ccc` or `scc`; `repair` non-zero repairs an indefinite matrix.
 *
 * # Safety
 * All strings must be NUL-terminated and `out` a valid pointer.
 */
enum NcmStatus ncm_model_build(const char *samples_csv,
                               const char *intervals_csv,
                               const char *variant,
                               const char *method,
                               int32_t repair,
                               struct NcmModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void ncm_model_free(struct NcmModel *model);

/**
 * Number of variables.
 *
 * # Safety
 * `model` must be a live handle or null (returns 0).
 */
uintptr_t ncm_model_dim(const struct NcmModel *model);

/**
 * Membership of a physical point. `inside` receives 1 or 0 and `slack`
 * (optional) the value of the defining inequality.
 *
 * # Safety
 * `x` must point to `len` doubles; `inside` must be valid; `slack` may be null.
 */
enum NcmStatus ncm_model_contains(const struct NcmModel *model,
                                  const double *x,
                                  uintptr_t len,
                                  int32_t *inside,
                                  double *slack);

/**
 * Volume ratio and standard volume ratio.
 *
 * # Safety
 * `nu` and `nu_bar` must be valid pointers.
 */
enum NcmStatus ncm_model_volume_ratio(const struct NcmModel *model, double *nu, double *nu_bar);

/**
 * Model file text for a handle. Free the result with [`ncm_string_free`].
 *
 * # Safety
 * `model` must be a live handle.
 */
char *ncm_model_to_toml(const struct NcmModel *model);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void ncm_string_free(char *s);

/**
 * Reliability index of the limit state `expr`, with the model's own norm.
 * `names`/`values` bind `n_bindings` extra constants.
 *
 * # Safety
 * `expr` must be NUL-terminated; `names` and `values` must hold
 * `n_bindings` entries; `eta` must be valid.
 */
enum NcmStatus ncm_reliability_index(const struct NcmModel *model,
                                     const char *expr,
                                     const char *const *names,
                                     const double *values,
                                     uintptr_t n_bindings,
                                     double *eta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCM_H */
