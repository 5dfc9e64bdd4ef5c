#ifndef GOU_RUIN_H
#define GOU_RUIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GouJumpKind {
  GOU_JUMP_KIND_GAUSSIAN = 0,
  GOU_JUMP_KIND_LAPLACE = 1,
} GouJumpKind;

typedef enum GouStatus {
  GOU_STATUS_OK = 0,
  GOU_STATUS_NULL_POINTER = 1,
  GOU_STATUS_INVALID_ARGUMENT = 2,
  GOU_STATUS_INVALID_MODEL = 3,
  GOU_STATUS_CONDITION_GATE = 4,
  GOU_STATUS_NUMERICAL = 5,
  GOU_STATUS_CONFIG = 6,
  GOU_STATUS_PANIC = 7,
} GouStatus;

typedef enum GouVerdict {
  GOU_VERDICT_VERIFIED = 0,
  GOU_VERDICT_NOT_VERIFIED = 1,
  GOU_VERDICT_FAILED = 2,
} GouVerdict;

/*
 Opaque validated model handle.
 */
typedef struct GouModel GouModel;

typedef struct GouCpGaussianParams {
  double gamma_xi;
  double gamma_eta;
  double lambda;
  double mean_x;
  double mean_y;
  double var_x;
  double cov_xy;
  double var_y;
} GouCpGaussianParams;

typedef struct GouBrownianDriftParams {
  double gamma_xi;
  double gamma_eta;
  double var_xi;
  double cov_xi_eta;
  double var_eta;
} GouBrownianDriftParams;

/*
 `jump_mean`/`jump_var` are read for Gaussian jumps, `rho` for Laplace.
 */
typedef struct GouJumpDiffusionParams {
  double gamma_xi;
  double gamma_eta;
  double sigma2;
  double lambda;
  enum GouJumpKind jump_kind;
  double jump_mean;
  double jump_var;
  double rho;
} GouJumpDiffusionParams;

typedef struct GouVarianceGammaParams {
  double gamma_xi;
  double gamma_eta;
  double mu;
  double shape;
  double rate;
} GouVarianceGammaParams;

typedef struct GouProfile {
  double w;
  double mu_star;
  double alpha0;
  bool alpha0_certified;
  double x0;
  /*
   `1/μ*`, where the rate function reaches `w`.
   */
  double flat_from;
} GouProfile;

typedef struct GouConditions {
  enum GouVerdict cond_a;
  enum GouVerdict cond_b;
  enum GouVerdict cond_c;
} GouConditions;

typedef struct GouRuinConfig {
  uint64_t n_paths;
  uint64_t seed;
  double h;
  double theta;
  double t_max;
  /*
   0 uses every available core.
   */
  size_t workers;
  bool force;
} GouRuinConfig;

typedef struct GouRuinPoint {
  double z;
  double psi_hat;
  double ci_lo;
  double ci_hi;
  uint64_t n_paths;
  uint64_t n_ruined;
  double censored_frac;
  double underflow_frac;
} GouRuinPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL after a success.
 The pointer stays valid until the next call into this library.
 */
const char *gou_last_error_message(void);

/*
 # Safety
 `params` and `out` must be valid pointers.
 */
enum GouStatus gou_model_cp_gaussian(const struct GouCpGaussianParams *params,
                                     struct GouModel **out);

/*
 # Safety
 `params` and `out` must be valid pointers.
 */
enum GouStatus gou_model_brownian_drift(const struct GouBrownianDriftParams *params,
                                        struct GouModel **out);

/*
 # Safety
 `params` and `out` must be valid pointers.
 */
enum GouStatus gou_model_jump_diffusion(const struct GouJumpDiffusionParams *params,
                                        struct GouModel **out);

/*
 # Safety
 `params` and `out` must be valid pointers.
 */
enum GouStatus gou_model_variance_gamma(const struct GouVarianceGammaParams *params,
                                        struct GouModel **out);

/*
 Builds the model described by the `[model]` section of a TOML config.

 # Safety
 `config` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GouStatus gou_model_from_config(const char *config, struct GouModel **out);

/*
 # Safety
 `model` must come from a constructor here and not be freed twice. NULL is
 accepted.
 */
void gou_model_free(struct GouModel *model);

/*
 `c(α) = ln E e^{-α ξ_1}`.

 # Safety
 `model` and `out` must be valid pointers.
 */
enum GouStatus gou_laplace_exponent(const struct GouModel *model, double alpha, double *out);

/*
 # Safety
 All pointers must be valid.
 */
enum GouStatus gou_laplace_derivatives(const struct GouModel *model,
                                       double alpha,
                                       double *d1,
                                       double *d2);

/*
 # Safety
 `model` and `out` must be valid pointers.
 */
enum GouStatus gou_cramer_profile(const struct GouModel *model, struct GouProfile *out);

/*
 `c*(v)`; may be `+inf`.

 # Safety
 `model` and `out` must be valid pointers.
 */
enum GouStatus gou_fenchel_legendre(const struct GouModel *model, double v, double *out);

/*
 `R(x)` for `x > x0`.

 # Safety
 `model` and `out` must be valid pointers.
 */
enum GouStatus gou_rate_function(const struct GouModel *model, double x, double *out);

/*
 # Safety
 `model` and `out` must be valid pointers.
 */
enum GouStatus gou_check_conditions(const struct GouModel *model, struct GouConditions *out);

/*
 Library defaults for `n_paths` paths under `seed`.
 */
struct GouRuinConfig gou_ruin_config_default(uint64_t n_paths, uint64_t seed);

/*
 Estimates `ψ(z)` on an ascending grid, writing `n_z` points to `out`.

 # Safety
 `z_grid` and `out` must each point to `n_z` elements.
 */
enum GouStatus gou_estimate_ruin_curve(const struct GouModel *model,
                                       const struct GouRuinConfig *config,
                                       const double *z_grid,
                                       size_t n_z,
                                       struct GouRuinPoint *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GOU_RUIN_H */
