/* C API for the soliton-forge toolkit.
 *
 * Conventions:
 *   - Fallible calls return an SfStatus and write results through out
 *     parameters. SF_OK is 0.
 *   - SfPhase is an opaque handle; release it with sf_phase_free.
 *   - Strings returned through char** are NUL-terminated and must be
 *     released with sf_string_free.
 *   - sf_last_error_message() returns the current thread's last error text
 *     (empty string if none); the pointer is valid until the next failing
 *     call on the same thread. Do not free it.
 *
 * Operator names accepted by sf_operator_is_zero:
 *   heat, airy, wx, wy, T, kp_residual,
 *   kdv_ai, kdv_w, kdv_T, mkdv_res,
 *   zk_ai, zk_w1, zk_wxj, mzk_ai, mzk_w, mzk_lambda
 */

#ifndef SOLITON_FORGE_H
#define SOLITON_FORGE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum SfStatus {
  SF_OK = 0,
  SF_ERR_SYNTAX = 1,
  SF_ERR_SEMANTIC = 2,
  SF_ERR_COMPUTE = 3,
  SF_ERR_NULL_ARGUMENT = 4,
  SF_ERR_INVALID_UTF8 = 5,
  SF_ERR_PANIC = 6
} SfStatus;

typedef struct SfPhase SfPhase;

const char *sf_last_error_message(void);

/* Expression parsing over the default (t, x, y) variables. */
SfStatus sf_phase_parse(const char *expr, SfPhase **out);

/* Explicit comma-separated variable set, e.g. "t,x" for the KdV/mKdV
 * models or "t,x1,x2" for ZK; pass NULL for the default. Non-KP sets
 * accept only the canonical polynomial expression form. */
SfStatus sf_phase_parse_with_vars(const char *expr, const char *vars, SfPhase **out);

void sf_phase_free(SfPhase *phase);
void sf_string_free(char *s);

int32_t sf_phase_term_count(const SfPhase *phase);
SfStatus sf_phase_to_string(const SfPhase *phase, char **out);

/* 1 when every functional produced by the named operator is exactly zero. */
SfStatus sf_operator_is_zero(const SfPhase *phase, const char *op, int32_t *out_is_zero);

SfStatus sf_classify_json(const SfPhase *phase, char **out_json);

/* Reconstructs resonant parameters (m >= 2) from the cleared y-Wronskian;
 * on success out_json holds {"k": [...], "a": [...]} with exact rationals
 * as strings. */
SfStatus sf_reconstruct_json(const SfPhase *phase, uint32_t m, char **out_json);

/* Samples u over the grid (profile "log" or "arctan2"; model "kp", "kdv"
 * or "mkdv") and writes CSV rows x,y,u to path. Counts must be >= 8. */
SfStatus sf_grid_csv(const SfPhase *phase, const char *profile, const char *model,
                     double t0, double x_min, double x_max, uint32_t x_count,
                     double y_min, double y_max, uint32_t y_count,
                     const char *path);

/* Central-difference residual of the model PDE at steps h and h/2. */
SfStatus sf_fd_residual(const SfPhase *phase, const char *profile, const char *model,
                        double t0, double x_min, double x_max, uint32_t x_count,
                        double y_min, double y_max, uint32_t y_count, double h,
                        double *out_max_residual, double *out_order);

/* Runs verification criteria 1-11; out_all_pass receives 1/0, out_json the
 * per-criterion report array. */
SfStatus sf_selftest(uint64_t seed, int32_t *out_all_pass, char **out_json);

#ifdef __cplusplus
}
#endif

#endif /* SOLITON_FORGE_H */
