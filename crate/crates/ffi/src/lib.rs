//! C ABI over `gou_ruin`.
//!
//! Every entry point returns a [`GouStatus`]; results go through out
//! pointers. On failure the message is available from
//! [`gou_last_error_message`] on the calling thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gou_ruin::cli::config::{parse_config, ConfigError};
use gou_ruin::cramer::{self, CramerError, Verdict};
use gou_ruin::levy::{
    self, BrownianDriftParams, CpGaussianParams, JumpDiffusionParams, JumpLaw, Model, ModelError, ModelSpec,
    VarianceGammaParams,
};
use gou_ruin::ruin::{self, RuinConfig, RuinError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GouStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    ConditionGate = 4,
    Numerical = 5,
    Config = 6,
    Panic = 7,
}

/// Opaque validated model handle.
pub struct GouModel {
    inner: Model,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GouJumpKind {
    Gaussian = 0,
    Laplace = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GouCpGaussianParams {
    pub gamma_xi: f64,
    pub gamma_eta: f64,
    pub lambda: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub cov_xy: f64,
    pub var_y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GouBrownianDriftParams {
    pub gamma_xi: f64,
    pub gamma_eta: f64,
    pub var_xi: f64,
    pub cov_xi_eta: f64,
    pub var_eta: f64,
}

/// `jump_mean`/`jump_var` are read for Gaussian jumps, `rho` for Laplace.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GouJumpDiffusionParams {
    pub gamma_xi: f64,
    pub gamma_eta: f64,
    pub sigma2: f64,
    pub lambda: f64,
    pub jump_kind: GouJumpKind,
    pub jump_mean: f64,
    pub jump_var: f64,
    pub rho: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GouVarianceGammaParams {
    pub gamma_xi: f64,
    pub gamma_eta: f64,
    pub mu: f64,
    pub shape: f64,
    pub rate: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GouProfile {
    pub w: f64,
    pub mu_star: f64,
    pub alpha0: f64,
    pub alpha0_certified: bool,
    pub x0: f64,
    /// `1/μ*`, where the rate function reaches `w`.
    pub flat_from: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GouVerdict {
    Verified = 0,
    NotVerified = 1,
    Failed = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GouConditions {
    pub cond_a: GouVerdict,
    pub cond_b: GouVerdict,
    pub cond_c: GouVerdict,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GouRuinConfig {
    pub n_paths: u64,
    pub seed: u64,
    pub h: f64,
    pub theta: f64,
    pub t_max: f64,
    /// 0 uses every available core.
    pub workers: usize,
    pub force: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GouRuinPoint {
    pub z: f64,
    pub psi_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_paths: u64,
    pub n_ruined: u64,
    pub censored_frac: f64,
    pub underflow_frac: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(GouStatus, String);

impl From<ModelError> for Fail {
    fn from(e: ModelError) -> Self {
        let status = match e {
            ModelError::ConditionAViolation { .. } => GouStatus::ConditionGate,
            ModelError::OutOfDomain { .. } => GouStatus::InvalidArgument,
            _ => GouStatus::InvalidModel,
        };
        Fail(status, e.to_string())
    }
}

impl From<CramerError> for Fail {
    fn from(e: CramerError) -> Self {
        let status = match e {
            CramerError::BelowX0 { .. } => GouStatus::InvalidArgument,
            _ => GouStatus::Numerical,
        };
        Fail(status, e.to_string())
    }
}

impl From<RuinError> for Fail {
    fn from(e: RuinError) -> Self {
        let status = match e {
            RuinError::ConditionGate(_) => GouStatus::ConditionGate,
            RuinError::InsufficientRuins { .. } | RuinError::Cramer(_) => GouStatus::Numerical,
            _ => GouStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

impl From<ConfigError> for Fail {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Model(m) => m.into(),
            other => Fail(GouStatus::Config, other.to_string()),
        }
    }
}

/// Runs `f`, recording any error or panic for [`gou_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GouStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GouStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            GouStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(GouStatus::NullPointer, "null pointer argument".into())
}

unsafe fn model_ref<'a>(m: *const GouModel) -> Result<&'a Model, Fail> {
    m.as_ref().map(|m| &m.inner).ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn build(spec: ModelSpec, out: *mut *mut GouModel) -> GouStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let inner = levy::validate(spec)?;
        out.write(Box::into_raw(Box::new(GouModel { inner })));
        Ok(())
    })
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn gou_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_model_cp_gaussian(params: *const GouCpGaussianParams, out: *mut *mut GouModel) -> GouStatus {
    let Some(p) = params.as_ref() else {
        return guard(|| Err(null()));
    };
    build(
        ModelSpec::CpGaussian(CpGaussianParams {
            gamma_xi: p.gamma_xi,
            gamma_eta: p.gamma_eta,
            lambda: p.lambda,
            mean_x: p.mean_x,
            mean_y: p.mean_y,
            var_x: p.var_x,
            cov_xy: p.cov_xy,
            var_y: p.var_y,
        }),
        out,
    )
}

/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_model_brownian_drift(
    params: *const GouBrownianDriftParams,
    out: *mut *mut GouModel,
) -> GouStatus {
    let Some(p) = params.as_ref() else {
        return guard(|| Err(null()));
    };
    build(
        ModelSpec::BrownianDrift(BrownianDriftParams {
            gamma_xi: p.gamma_xi,
            gamma_eta: p.gamma_eta,
            var_xi: p.var_xi,
            cov_xi_eta: p.cov_xi_eta,
            var_eta: p.var_eta,
        }),
        out,
    )
}

/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_model_jump_diffusion(
    params: *const GouJumpDiffusionParams,
    out: *mut *mut GouModel,
) -> GouStatus {
    let Some(p) = params.as_ref() else {
        return guard(|| Err(null()));
    };
    let jump = match p.jump_kind {
        GouJumpKind::Gaussian => JumpLaw::Gaussian { mean: p.jump_mean, var: p.jump_var },
        GouJumpKind::Laplace => JumpLaw::Laplace { rho: p.rho },
    };
    build(
        ModelSpec::JumpDiffusion(JumpDiffusionParams {
            gamma_xi: p.gamma_xi,
            gamma_eta: p.gamma_eta,
            sigma2: p.sigma2,
            lambda: p.lambda,
            jump,
        }),
        out,
    )
}

/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_model_variance_gamma(
    params: *const GouVarianceGammaParams,
    out: *mut *mut GouModel,
) -> GouStatus {
    let Some(p) = params.as_ref() else {
        return guard(|| Err(null()));
    };
    build(
        ModelSpec::VarianceGamma(VarianceGammaParams {
            gamma_xi: p.gamma_xi,
            gamma_eta: p.gamma_eta,
            mu: p.mu,
            shape: p.shape,
            rate: p.rate,
        }),
        out,
    )
}

/// Builds the model described by the `[model]` section of a TOML config.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gou_model_from_config(config: *const c_char, out: *mut *mut GouModel) -> GouStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| Fail(GouStatus::InvalidArgument, format!("config is not UTF-8: {e}")))?;
        let cfg = parse_config(text)?;
        let inner = cfg.build_model()?;
        out.write(Box::into_raw(Box::new(GouModel { inner })));
        Ok(())
    })
}

/// # Safety
/// `model` must come from a constructor here and not be freed twice. NULL is
/// accepted.
#[no_mangle]
pub unsafe extern "C" fn gou_model_free(model: *mut GouModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// `c(α) = ln E e^{-α ξ_1}`.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_laplace_exponent(model: *const GouModel, alpha: f64, out: *mut f64) -> GouStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(out, m.laplace_exponent(alpha)?)
    })
}

/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gou_laplace_derivatives(
    model: *const GouModel,
    alpha: f64,
    d1: *mut f64,
    d2: *mut f64,
) -> GouStatus {
    guard(|| {
        let m = model_ref(model)?;
        if d1.is_null() || d2.is_null() {
            return Err(null());
        }
        let (a, b) = m.laplace_exponent_derivatives(alpha)?;
        write(d1, a)?;
        write(d2, b)
    })
}

/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_cramer_profile(model: *const GouModel, out: *mut GouProfile) -> GouStatus {
    guard(|| {
        let m = model_ref(model)?;
        let p = cramer::lundberg_and_profile(m)?;
        write(
            out,
            GouProfile {
                w: p.w,
                mu_star: p.mu_star,
                alpha0: p.alpha0,
                alpha0_certified: p.alpha0_certified,
                x0: p.x0,
                flat_from: p.flat_from(),
            },
        )
    })
}

/// `c*(v)`; may be `+inf`.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_fenchel_legendre(model: *const GouModel, v: f64, out: *mut f64) -> GouStatus {
    guard(|| {
        let m = model_ref(model)?;
        if v.is_nan() {
            return Err(Fail(GouStatus::InvalidArgument, "v is NaN".into()));
        }
        write(out, cramer::fenchel_legendre(m, v))
    })
}

/// `R(x)` for `x > x0`.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_rate_function(model: *const GouModel, x: f64, out: *mut f64) -> GouStatus {
    guard(|| {
        let m = model_ref(model)?;
        let p = cramer::lundberg_and_profile(m)?;
        write(out, cramer::rate_function(&p, m, x)?)
    })
}

/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gou_check_conditions(model: *const GouModel, out: *mut GouConditions) -> GouStatus {
    guard(|| {
        let m = model_ref(model)?;
        let p = cramer::lundberg_and_profile(m).ok();
        let r = cramer::check_conditions(m, p.as_ref());
        let v = |v: Verdict| match v {
            Verdict::Verified => GouVerdict::Verified,
            Verdict::NotVerified => GouVerdict::NotVerified,
            Verdict::Failed => GouVerdict::Failed,
        };
        write(out, GouConditions { cond_a: v(r.cond_a.verdict), cond_b: v(r.cond_b.verdict), cond_c: v(r.cond_c.verdict) })
    })
}

/// Library defaults for `n_paths` paths under `seed`.
#[no_mangle]
pub extern "C" fn gou_ruin_config_default(n_paths: u64, seed: u64) -> GouRuinConfig {
    let c = RuinConfig::new(n_paths, seed);
    GouRuinConfig { n_paths: c.n_paths, seed: c.seed, h: c.h, theta: c.theta, t_max: c.t_max, workers: c.workers, force: c.force }
}

/// Estimates `ψ(z)` on an ascending grid, writing `n_z` points to `out`.
///
/// # Safety
/// `z_grid` and `out` must each point to `n_z` elements.
#[no_mangle]
pub unsafe extern "C" fn gou_estimate_ruin_curve(
    model: *const GouModel,
    config: *const GouRuinConfig,
    z_grid: *const f64,
    n_z: usize,
    out: *mut GouRuinPoint,
) -> GouStatus {
    guard(|| {
        let m = model_ref(model)?;
        let c = config.as_ref().ok_or_else(null)?;
        if z_grid.is_null() || out.is_null() {
            return Err(null());
        }
        if n_z == 0 {
            return Err(Fail(GouStatus::InvalidArgument, "empty z grid".into()));
        }
        let zs = std::slice::from_raw_parts(z_grid, n_z);
        let cfg = RuinConfig {
            n_paths: c.n_paths,
            seed: c.seed,
            h: c.h,
            theta: c.theta,
            t_max: c.t_max,
            workers: c.workers,
            force: c.force,
        };
        let curve = ruin::estimate_ruin_curve(m, zs, &cfg)?;
        for (i, p) in curve.points.iter().enumerate() {
            out.add(i).write(GouRuinPoint {
                z: p.z,
                psi_hat: p.psi_hat,
                ci_lo: p.ci_lo,
                ci_hi: p.ci_hi,
                n_paths: p.n_paths,
                n_ruined: p.n_ruined,
                censored_frac: p.censored_frac,
                underflow_frac: p.underflow_frac,
            });
        }
        Ok(())
    })
}
