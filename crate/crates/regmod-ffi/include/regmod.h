#ifndef REGMOD_H
#define REGMOD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared with the C side.
 */
typedef enum RegmodStatus {
  REGMOD_OK = 0,
  /**
   * Invalid configuration (bad JSON, unknown family, schema violation).
   */
  REGMOD_ERR_CONFIG = 1,
  /**
   * Invalid call (dimension mismatch, bad arguments, missing seed).
   */
  REGMOD_ERR_USAGE = 2,
  /**
   * The instance family does not support the requested operation.
   */
  REGMOD_ERR_CAPABILITY = 3,
  /**
   * No exact subdifferential formula at the queried point.
   */
  REGMOD_ERR_NO_FORMULA = 4,
  /**
   * Not enough usable samples for the requested estimate.
   */
  REGMOD_ERR_INSUFFICIENT_DATA = 5,
  REGMOD_ERR_NULL_POINTER = 6,
  REGMOD_ERR_UTF8 = 7,
  /**
   * Internal panic was caught at the boundary.
   */
  REGMOD_ERR_INTERNAL = 8,
} RegmodStatus;

/**
 * Opaque instance handle.
 */
typedef struct RegmodInstance RegmodInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *regmod_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void regmod_string_free(char *s);

/**
 * Load an instance from a catalog name.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum RegmodStatus regmod_instance_by_name(const char *name, struct RegmodInstance **out);

/**
 * Load an instance from a JSON record (same schema as the catalog files).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum RegmodStatus regmod_instance_from_json(const char *json, struct RegmodInstance **out);

/**
 * # Safety
 * `instance` must come from a load call and not be freed twice.
 */
void regmod_instance_free(struct RegmodInstance *instance);

/**
 * Dimension `p` of the instance; 0 on a null handle.
 *
 * # Safety
 * `instance` must be a live handle or null.
 */
uintptr_t regmod_instance_dimension(const struct RegmodInstance *instance);

/**
 * `f(x)`; `+∞` is returned as `INFINITY`.
 *
 * # Safety
 * `instance` must be a live handle, `x` must point to `len` doubles, and
 * `out` must be valid.
 */
enum RegmodStatus regmod_evaluate(const struct RegmodInstance *instance,
                                  const double *x,
                                  uintptr_t len,
                                  double *out);

/**
 * Exact `dist(0, ∂f(x))`. Points without an exact formula produce
 * `REGMOD_ERR_NO_FORMULA`, never a silent zero.
 *
 * # Safety
 * `instance` must be a live handle, `x` must point to `len` doubles, and
 * `out` must be valid.
 */
enum RegmodStatus regmod_subdiff_distance(const struct RegmodInstance *instance,
                                          const double *x,
                                          uintptr_t len,
                                          double *out);

/**
 * `‖prox_h(x − ∇g(x)) − x‖`, the unit-step proximal-gradient residual.
 *
 * # Safety
 * `instance` must be a live handle, `x` must point to `len` doubles, and
 * `out` must be valid.
 */
enum RegmodStatus regmod_residual_norm(const struct RegmodInstance *instance,
                                       const double *x,
                                       uintptr_t len,
                                       double *out);

/**
 * Exact `dist(x, crit f)` against the enumerated critical set.
 *
 * # Safety
 * `instance` must be a live handle, `x` must point to `len` doubles, and
 * `out` must be valid.
 */
enum RegmodStatus regmod_critical_distance(const struct RegmodInstance *instance,
                                           const double *x,
                                           uintptr_t len,
                                           double *out);

/**
 * `∇g(x)` written into `out[0..len]`.
 *
 * # Safety
 * `instance` must be a live handle; `x` and `out` must point to `len`
 * doubles each.
 */
enum RegmodStatus regmod_smooth_gradient(const struct RegmodInstance *instance,
                                         const double *x,
                                         uintptr_t len,
                                         double *out);

/**
 * Sample a cloud around `base` and estimate every modulus; the result is
 * the same JSON object the CLI `estimate` subcommand prints.
 *
 * # Safety
 * `instance` must be a live handle; `base` and `radii` must point to the
 * given counts of doubles; `out_json` must be valid.
 */
enum RegmodStatus regmod_estimate_json(const struct RegmodInstance *instance,
                                       const double *base,
                                       uintptr_t base_len,
                                       const double *radii,
                                       uintptr_t radii_len,
                                       uint32_t samples_per_radius,
                                       uint64_t seed,
                                       char **out_json);

/**
 * Full check pipeline (cloud, estimators, prox-regularity, implication
 * checks); the result is the CLI `check` report JSON. `out_all_passed`
 * receives 1 iff every non-skipped check held. Pass null/0 for `base`
 * and `radii` to take the instance defaults.
 *
 * # Safety
 * `instance_name` must be NUL-terminated; `base`/`radii` must point to the
 * given counts of doubles when non-null; `out_json` must be valid.
 */
enum RegmodStatus regmod_check_json(const char *instance_name,
                                    const double *base,
                                    uintptr_t base_len,
                                    const double *radii,
                                    uintptr_t radii_len,
                                    uint32_t samples_per_radius,
                                    uint64_t seed,
                                    double tol,
                                    char **out_json,
                                    int32_t *out_all_passed);

/**
 * Names of the built-in catalog instances as a JSON array.
 *
 * # Safety
 * `out_json` must be a valid pointer.
 */
enum RegmodStatus regmod_catalog_json(char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGMOD_H */
