#ifndef DISSIPATIVE_H
#define DISSIPATIVE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible function.
 */
typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_SHAPE = 2,
  DS_STATUS_STRUCTURE = 3,
  DS_STATUS_NOT_APPLICABLE = 4,
  DS_STATUS_INFEASIBLE = 5,
  DS_STATUS_INVALID_PARAMS = 6,
  DS_STATUS_NOT_FINITE = 7,
  DS_STATUS_CONFIG = 8,
  DS_STATUS_NUMERICAL = 9,
  DS_STATUS_PANIC = 10,
} DsStatus;

/*
 Radius variants accepted by [`ds_radius`].
 */
typedef enum DsRadiusKind {
  DS_RADIUS_KIND_UNSTRUCTURED_COMPLEX = 0,
  DS_RADIUS_KIND_STRUCTURED_COMPLEX = 1,
  DS_RADIUS_KIND_UNSTRUCTURED_REAL_BOUNDS = 2,
  DS_RADIUS_KIND_STRUCTURED_REAL = 3,
  DS_RADIUS_KIND_SINGULARITY_DISTANCE = 4,
} DsRadiusKind;

/*
 Opaque complex matrix.
 */
typedef struct DsMatrix DsMatrix;

/*
 Opaque validated DH system.
 */
typedef struct DsSystem DsSystem;

/*
 Tolerances. A negative `rank_rtol` selects the size-dependent default.
 */
typedef struct DsTolerances {
  double rank_rtol;
  double psd_tol;
  double residual_tol;
} DsTolerances;

/*
 Frequency sweep settings. A non-positive `w_max` is resolved per system.
 */
typedef struct DsSweepConfig {
  double w_max;
  size_t grid_points;
  size_t refine_iters;
  size_t multistarts;
  uint64_t rng_seed;
} DsSweepConfig;

typedef struct DsMappingResult {
  double frob_norm_sq;
  double residual;
  double min_eig_sym;
  bool feasible;
} DsMappingResult;

/*
 Radius outcome. `lower` and `upper` are NaN when the kind has no bounds.
 */
typedef struct DsRadiusResult {
  double value;
  double lower;
  double upper;
  double w_star;
  bool certified;
} DsRadiusResult;

typedef struct DsEtaResult {
  double w;
  double lower_bound;
  double upper_bound;
  double optimized_value;
  double eig_residual;
  size_t omega_dim;
  bool equality_certified;
} DsEtaResult;

typedef struct DsMuResult {
  double value;
  double gamma_star;
  bool boundary_limit;
} DsMuResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. The pointer is
 valid until the next call into this library from the same thread.
 */
const char *ds_last_error_message(void);

struct DsTolerances ds_tolerances_default(void);

struct DsSweepConfig ds_sweep_config_default(void);

/*
 Creates a `rows x cols` matrix from row-major `re` and optional `im`.

 # Safety
 `re` (and `im` when non-null) must point to `rows * cols` doubles.
 */
enum DsStatus ds_matrix_new(size_t rows,
                            size_t cols,
                            const double *re,
                            const double *im,
                            struct DsMatrix **out_matrix);

/*
 # Safety
 `m` must be null or a handle from this library not yet freed.
 */
void ds_matrix_free(struct DsMatrix *m);

/*
 # Safety
 `m` must be a live handle.
 */
size_t ds_matrix_rows(const struct DsMatrix *m);

/*
 # Safety
 `m` must be a live handle.
 */
size_t ds_matrix_cols(const struct DsMatrix *m);

/*
 Copies the entries row-major into `re` and, when non-null, `im`.

 # Safety
 `re` (and `im` when non-null) must have room for `rows * cols` doubles.
 */
enum DsStatus ds_matrix_copy(const struct DsMatrix *m, double *re, double *im);

/*
 Validates `(J, R, Q)` as a DH system. `tol` may be null for defaults.

 # Safety
 Handles must be live; `out_system` must be writable.
 */
enum DsStatus ds_system_new(const struct DsMatrix *j,
                            const struct DsMatrix *r,
                            const struct DsMatrix *q,
                            bool real,
                            const struct DsTolerances *tol,
                            struct DsSystem **out_system);

/*
 # Safety
 `s` must be null or a handle from this library not yet freed.
 */
void ds_system_free(struct DsSystem *s);

/*
 # Safety
 `s` must be a live handle.
 */
size_t ds_system_dim(const struct DsSystem *s);

/*
 Minimal dissipative `Δ` with `ΔX = Y`. With `real` set, the real
 variant is computed. `out_delta` may be null.

 # Safety
 Handles must be live; `out_result` must be writable.
 */
enum DsStatus ds_min_norm_dissipative(const struct DsMatrix *x,
                                      const struct DsMatrix *y,
                                      bool real,
                                      const struct DsTolerances *tol,
                                      struct DsMappingResult *out_result,
                                      struct DsMatrix **out_delta);

/*
 Stability radius of `sys` under perturbations restricted by `B` and
 `C` (`C` may be null for `B^*`). `cfg` may be null for defaults. The
 certificate outputs may be null and are left untouched when no
 certificate exists.

 # Safety
 Handles must be live; `out_result` must be writable.
 */
enum DsStatus ds_radius(const struct DsSystem *sys,
                        const struct DsMatrix *b,
                        const struct DsMatrix *c,
                        enum DsRadiusKind kind,
                        const struct DsSweepConfig *cfg,
                        struct DsRadiusResult *out_result,
                        struct DsMatrix **out_delta_j,
                        struct DsMatrix **out_delta_r);

/*
 Structured eigenvalue backward error at `iw`. Uses real perturbations
 when the system was created as real.

 # Safety
 Handles must be live; `out_result` must be writable.
 */
enum DsStatus ds_eta(const struct DsSystem *sys,
                     const struct DsMatrix *b,
                     double w,
                     const struct DsSweepConfig *cfg,
                     struct DsEtaResult *out_result);

/*
 Real structured singular value `μ_R(M)` for the spectral norm.

 # Safety
 `m` must be live; `out_result` must be writable.
 */
enum DsStatus ds_mu_real(const struct DsMatrix *m, struct DsMuResult *out_result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISSIPATIVE_H */
