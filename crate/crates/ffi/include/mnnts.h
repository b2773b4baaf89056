#ifndef MNNTS_H
#define MNNTS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum MnntsStatus {
  MNNTS_STATUS_OK = 0,
  MNNTS_STATUS_NULL_POINTER = 1,
  MNNTS_STATUS_INVALID_ARGUMENT = 2,
  MNNTS_STATUS_DATA_ERROR = 3,
  MNNTS_STATUS_NUMERIC_ERROR = 4,
  MNNTS_STATUS_DEGENERATE = 5,
  MNNTS_STATUS_IO_ERROR = 6,
  MNNTS_STATUS_BUFFER_TOO_SMALL = 7,
  MNNTS_STATUS_PANIC = 8,
} MnntsStatus;

/*
 Estimation method for [`mnnts_fit`] and [`mnnts_lr_test`].
 */
typedef enum MnntsMethod {
  MNNTS_METHOD_MD = 0,
  MNNTS_METHOD_ML = 1,
} MnntsMethod;

/*
 Opaque dataset handle.
 */
typedef struct MnntsDataset MnntsDataset;

/*
 Opaque model handle.
 */
typedef struct MnntsModel MnntsModel;

/*
 Result of a likelihood-ratio test of independence.
 */
typedef struct MnntsLrResult {
  double statistic;
  uint64_t df;
  double p_value;
  double loglik_full;
  double loglik_indep;
  bool approximate;
  bool clipped;
} MnntsLrResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the most recent failure on this thread, or an empty
 string. The pointer stays valid until the next call into this library on
 the same thread.
 */
const char *mnnts_last_error_message(void);

/*
 Create a model from dimension orders and coefficient parts.

 With `normalize` false the coefficients must already satisfy the
 constraints; otherwise any nonzero vector is normalized.

 # Safety
 `dims` must point to `n_vars` values; `re` and `im` to `len` values each.
 `out` must be a valid pointer to receive the handle.
 */
enum MnntsStatus mnnts_model_new(const uintptr_t *dims,
                                 uintptr_t n_vars,
                                 const double *re,
                                 const double *im,
                                 uintptr_t len,
                                 bool normalize,
                                 struct MnntsModel **out);

/*
 Uniform model on the torus with the given orders.

 # Safety
 `dims` must point to `n_vars` values and `out` must be valid.
 */
enum MnntsStatus mnnts_model_uniform(const uintptr_t *dims,
                                     uintptr_t n_vars,
                                     struct MnntsModel **out);

/*
 Release a model. Null is ignored.

 # Safety
 `model` must come from this library and not have been freed.
 */
void mnnts_model_free(struct MnntsModel *model);

/*
 Number of variables, or 0 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
uintptr_t mnnts_model_n_vars(const struct MnntsModel *model);

/*
 Number of coefficients, or 0 for a null handle.

 # Safety
 `model` must be null or a live handle.
 */
uintptr_t mnnts_model_len(const struct MnntsModel *model);

/*
 Copy the dimension orders into `out` (capacity `cap`).

 # Safety
 `model` must be live; `out` must hold `cap` values.
 */
enum MnntsStatus mnnts_model_dims(const struct MnntsModel *model, uintptr_t *out, uintptr_t cap);

/*
 Copy real and imaginary parts of the coefficients into buffers of
 capacity `cap`.

 # Safety
 `model` must be live; `re` and `im` must hold `cap` values each.
 */
enum MnntsStatus mnnts_model_coefficients(const struct MnntsModel *model,
                                          double *re,
                                          double *im,
                                          uintptr_t cap);

/*
 Density at `theta` (`n` angles).

 # Safety
 `model` must be live, `theta` must hold `n` values and `out` be valid.
 */
enum MnntsStatus mnnts_density(const struct MnntsModel *model,
                               const double *theta,
                               uintptr_t n,
                               double *out);

/*
 Distribution function of a univariate model at `theta` in `[0, 2π]`.

 # Safety
 `model` must be live and `out` valid.
 */
enum MnntsStatus mnnts_cdf(const struct MnntsModel *model, double theta, double *out);

/*
 Mixing probabilities of the marginal of the `n_keep` variables in
 `keep`, in descending order. `out_len` receives the number of
 components; if it exceeds `cap` nothing is copied and
 `MNNTS_STATUS_BUFFER_TOO_SMALL` is returned.

 # Safety
 `model` must be live; `keep` must hold `n_keep` values; `out` must hold
 `cap` values; `out_len` must be valid.
 */
enum MnntsStatus mnnts_marginal_probabilities(const struct MnntsModel *model,
                                              const uintptr_t *keep,
                                              uintptr_t n_keep,
                                              double *out,
                                              uintptr_t cap,
                                              uintptr_t *out_len);

/*
 Component `index` of the marginal mixture as a new model.

 # Safety
 `model` must be live; `keep` must hold `n_keep` values; `out` valid.
 */
enum MnntsStatus mnnts_marginal_component(const struct MnntsModel *model,
                                          const uintptr_t *keep,
                                          uintptr_t n_keep,
                                          uintptr_t index,
                                          struct MnntsModel **out);

/*
 Conditional model of the remaining variables (ascending order) given
 `vars[i] = angles[i]`.

 # Safety
 `model` must be live; `vars` and `angles` must hold `n` values; `out`
 valid.
 */
enum MnntsStatus mnnts_conditional(const struct MnntsModel *model,
                                   const uintptr_t *vars,
                                   const double *angles,
                                   uintptr_t n,
                                   struct MnntsModel **out);

/*
 Independence score between two blocks of variables.

 # Safety
 `model` must be live; `first`/`second` must hold `n_first`/`n_second`
 values; `out` valid.
 */
enum MnntsStatus mnnts_independence_score(const struct MnntsModel *model,
                                          const uintptr_t *first,
                                          uintptr_t n_first,
                                          const uintptr_t *second,
                                          uintptr_t n_second,
                                          double *out);

/*
 Parse a JSON model file from a string.

 # Safety
 `json` must be a NUL-terminated string and `out` valid.
 */
enum MnntsStatus mnnts_model_from_json(const char *json, struct MnntsModel **out);

/*
 Serialize a model as JSON. Free the string with [`mnnts_string_free`].

 # Safety
 `model` must be live and `out` valid.
 */
enum MnntsStatus mnnts_model_to_json(const struct MnntsModel *model, char **out);

/*
 Read a model file.

 # Safety
 `path` must be a NUL-terminated string and `out` valid.
 */
enum MnntsStatus mnnts_model_load(const char *path, struct MnntsModel **out);

/*
 Write a model file.

 # Safety
 `model` must be live and `path` a NUL-terminated string.
 */
enum MnntsStatus mnnts_model_save(const struct MnntsModel *model, const char *path);

/*
 Release a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void mnnts_string_free(char *s);

/*
 Dataset from a row-major `n_obs × n_vars` array of radians.

 # Safety
 `values` must hold `n_obs * n_vars` values and `out` be valid.
 */
enum MnntsStatus mnnts_dataset_new(const double *values,
                                   uintptr_t n_obs,
                                   uintptr_t n_vars,
                                   struct MnntsDataset **out);

/*
 Read a CSV with a header row. Rows containing `missing` are dropped and
 counted in `dropped` (which may be null).

 # Safety
 `path` and `missing` must be NUL-terminated strings and `out` valid.
 */
enum MnntsStatus mnnts_dataset_load_csv(const char *path,
                                        bool degrees,
                                        const char *missing,
                                        struct MnntsDataset **out,
                                        uintptr_t *dropped);

/*
 Release a dataset. Null is ignored.

 # Safety
 `data` must come from this library and not have been freed.
 */
void mnnts_dataset_free(struct MnntsDataset *data);

/*
 Number of observations, or 0 for a null handle.

 # Safety
 `data` must be null or a live handle.
 */
uintptr_t mnnts_dataset_n_obs(const struct MnntsDataset *data);

/*
 Number of variables, or 0 for a null handle.

 # Safety
 `data` must be null or a live handle.
 */
uintptr_t mnnts_dataset_n_vars(const struct MnntsDataset *data);

/*
 Copy the row-major values (radians) into `out` of capacity `cap`.

 # Safety
 `data` must be live and `out` must hold `cap` values.
 */
enum MnntsStatus mnnts_dataset_values(const struct MnntsDataset *data, double *out, uintptr_t cap);

/*
 Fit a model. `loglik` may be null.

 # Safety
 `data` must be live; `dims` must hold `n_vars` values; `out` valid.
 */
enum MnntsStatus mnnts_fit(const struct MnntsDataset *data,
                           const uintptr_t *dims,
                           uintptr_t n_vars,
                           enum MnntsMethod method,
                           struct MnntsModel **out,
                           double *loglik);

/*
 Likelihood-ratio test of independence between two blocks.

 # Safety
 `data` must be live; `dims` must hold `n_vars` values; `first`/`second`
 must hold `n_first`/`n_second` values; `out` valid.
 */
enum MnntsStatus mnnts_lr_test(const struct MnntsDataset *data,
                               const uintptr_t *dims,
                               uintptr_t n_vars,
                               const uintptr_t *first,
                               uintptr_t n_first,
                               const uintptr_t *second,
                               uintptr_t n_second,
                               enum MnntsMethod method,
                               struct MnntsLrResult *out);

/*
 Draw `count` observations with a generator seeded by `seed`.

 # Safety
 `model` must be live and `out` valid.
 */
enum MnntsStatus mnnts_sample(const struct MnntsModel *model,
                              uint64_t seed,
                              uintptr_t count,
                              struct MnntsDataset **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MNNTS_H */
