#ifndef MEANLOGIC_H
#define MEANLOGIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum MlStatus {
  ML_STATUS_OK = 0,
  ML_STATUS_NULL_POINTER = 1,
  ML_STATUS_INVALID_UTF8 = 2,
  ML_STATUS_PARSE = 3,
  ML_STATUS_DOMAIN = 4,
  ML_STATUS_SIGNATURE = 5,
  ML_STATUS_STRUCTURAL = 6,
  ML_STATUS_CAP_EXCEEDED = 7,
  ML_STATUS_NOT_LINEAR = 8,
  ML_STATUS_INEXACT = 9,
  ML_STATUS_UNASSIGNED = 10,
  ML_STATUS_JSON = 11,
  ML_STATUS_INTERNAL = 12,
  ML_STATUS_PANIC = 13,
} MlStatus;

typedef struct MlCharge MlCharge;

typedef struct MlFormula MlFormula;

typedef struct MlMean MlMean;

typedef struct MlStructure MlStructure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next failing call.
 */
const char *ml_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void ml_string_free(char *s);

/**
 * Parses a structure from its JSON document.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum MlStatus ml_structure_from_json(const char *json, struct MlStructure **out);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_structure_to_json(const struct MlStructure *s, char **out);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum MlStatus ml_structure_size(const struct MlStructure *s, size_t *out);

/**
 * Validates against the metric axioms and the signature's bounds and moduli.
 * `*valid` receives the verdict and `*report` (if not NULL) the JSON violation list.
 *
 * # Safety
 * `s` must be a live handle; `valid` must be writable; `report` may be NULL.
 */
enum MlStatus ml_structure_validate(const struct MlStructure *s,
                                    uint32_t p,
                                    bool *valid,
                                    char **report);

/**
 * # Safety
 * `s` must be NULL or a live handle.
 */
void ml_structure_free(struct MlStructure *s);

/**
 * Parses a formula over the signature of `s`.
 *
 * # Safety
 * `text` must be nul-terminated; `s` a live handle; `out` writable.
 */
enum MlStatus ml_formula_parse(const char *formula,
                               const struct MlStructure *s,
                               struct MlFormula **out);

/**
 * Writes the canonical printed form of the formula.
 *
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum MlStatus ml_formula_to_string(const struct MlFormula *f, char **out);

/**
 * # Safety
 * `f` must be a live handle; `out` writable.
 */
enum MlStatus ml_formula_is_linear(const struct MlFormula *f, uint32_t p, bool *out);

/**
 * # Safety
 * `f` must be NULL or a live handle.
 */
void ml_formula_free(struct MlFormula *f);

/**
 * Evaluates exactly; `*out` receives the value as a `p/q` string.
 * `assignment` is NULL for sentences or a JSON object mapping variables to element names.
 *
 * # Safety
 * `f` and `s` must be live handles; `assignment` NULL or nul-terminated; `out` writable.
 */
enum MlStatus ml_eval(const struct MlFormula *f,
                      const struct MlStructure *s,
                      const char *assignment,
                      char **out);

/**
 * Parses a charge from `{"index": [...], "weights": [...]}`.
 *
 * # Safety
 * `json` must be nul-terminated; `out` writable.
 */
enum MlStatus ml_charge_from_json(const char *json, struct MlCharge **out);

/**
 * # Safety
 * `c` must be NULL or a live handle.
 */
void ml_charge_free(struct MlCharge *c);

/**
 * Builds the powermean `s^charge` for the p-norm `p`.
 *
 * # Safety
 * `s` and `charge` must be live handles; `out` writable.
 */
enum MlStatus ml_powermean(const struct MlStructure *s,
                           const struct MlCharge *charge,
                           uint32_t p,
                           struct MlMean **out);

/**
 * Builds the ultramean of `count` factors.
 *
 * # Safety
 * `factors` must point to `count` live handles; `charge` live; `out` writable.
 */
enum MlStatus ml_ultramean(const struct MlStructure *const *factors,
                           size_t count,
                           const struct MlCharge *charge,
                           uint32_t p,
                           struct MlMean **out);

/**
 * # Safety
 * `m` must be a live handle; `out` writable.
 */
enum MlStatus ml_mean_class_count(const struct MlMean *m, size_t *out);

/**
 * A new structure handle holding a copy of the mean's base structure.
 *
 * # Safety
 * `m` must be a live handle; `out` writable.
 */
enum MlStatus ml_mean_base(const struct MlMean *m, struct MlStructure **out);

/**
 * The class sidecar `{"classes": ..., "charge": ..., "p": k}` as JSON.
 *
 * # Safety
 * `m` must be a live handle; `out` writable.
 */
enum MlStatus ml_mean_sidecar_json(const struct MlMean *m, char **out);

/**
 * # Safety
 * `m` must be NULL or a live handle.
 */
void ml_mean_free(struct MlMean *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MEANLOGIC_H */
