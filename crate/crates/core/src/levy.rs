//! Parametric bivariate Lévy models `(ξ, η)`.
//!
//! Four families are supported: a bivariate compound Poisson process with
//! drift and Gaussian marks, a correlated Brownian motion with drift, a jump
//! diffusion `ξ` sharing its Brownian part with `η`, and a variance-gamma `ξ`
//! whose gamma clock is also the jump part of `η`.
//!
//! Each model exposes its Laplace exponent `c(α) = ln E e^{-α ξ_1}` in closed
//! form together with the open interval on which it is finite, and exact
//! samplers for increments over any time step.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("drift condition violated: long-run drift of xi is {drift} (must be > 0)")]
    DriftViolation { drift: f64 },
    #[error("covariance matrix is not positive definite")]
    NonPositiveDefinite,
    #[error("jump intensity must be > 0")]
    NonPositiveIntensity,
    #[error("gamma_eta = {gamma_eta} > 0 breaks the no-ruin exclusion (need gamma_eta <= 0)")]
    ConditionAViolation { gamma_eta: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("alpha = {alpha} lies outside the exponent domain {domain}")]
    OutOfDomain { alpha: f64, domain: ExponentDomain },
}

/// Open interval `(lo, hi)` on which `c(α)` is finite.
///
/// `*_singular` marks endpoints where `c(α) → +∞`; infinite endpoints are
/// never singular.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentDomain {
    pub lo: f64,
    pub hi: f64,
    pub lo_singular: bool,
    pub hi_singular: bool,
}

impl ExponentDomain {
    pub const REAL_LINE: ExponentDomain = ExponentDomain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_singular: false,
        hi_singular: false,
    };

    fn singular(lo: f64, hi: f64) -> Self {
        ExponentDomain { lo, hi, lo_singular: true, hi_singular: true }
    }

    pub fn contains(&self, alpha: f64) -> bool {
        alpha > self.lo && alpha < self.hi
    }
}

impl fmt::Display for ExponentDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// `(ξ, η)_t = (γ_ξ, γ_η) t + Σ_{i ≤ N_t} (X_i, Y_i)` with
/// bivariate Gaussian marks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpGaussianParams {
    pub gamma_xi: f64,
    pub gamma_eta: f64,
    pub lambda: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub cov_xy: f64,
    pub var_y: f64,
}

/// `(ξ, η)_t = (γ_ξ, γ_η) t + (B_ξ, B_η)_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrownianDriftParams {
    pub gamma_xi: f64,
    pub gamma_eta: f64,
    pub var_xi: f64,
    pub cov_xi_eta: f64,
    pub var_eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum JumpLaw {
    Gaussian { mean: f64, var: f64 },
    /// Density `ρ e^{-ρ|x|} / 2`.
    Laplace { rho: f64 },
}

/// `(ξ, η)_t = (γ_ξ, γ_η) t + (B_t + Σ_{i ≤ N_t} X_i, B_t)`, where
/// `B` has variance `sigma2` per unit time. Both coordinates share `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpDiffusionParams {
    pub gamma_xi: f64,
    pub gamma_eta: f64,
    pub sigma2: f64,
    pub lambda: f64,
    pub jump: JumpLaw,
}

/// `(ξ, η)_t = (γ_ξ, γ_η) t + (B(S_t) + μ S_t, S_t)` with `S` a
/// gamma subordinator, `E e^{-u S_t} = (1 + u/rate)^{-shape t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceGammaParams {
    pub gamma_xi: f64,
    pub gamma_eta: f64,
    pub mu: f64,
    pub shape: f64,
    pub rate: f64,
}

/// Raw, unvalidated parameter record for one of the four model families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    CpGaussian(CpGaussianParams),
    BrownianDrift(BrownianDriftParams),
    JumpDiffusion(JumpDiffusionParams),
    VarianceGamma(VarianceGammaParams),
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::CpGaussian(_) => "cp_gaussian",
            ModelSpec::BrownianDrift(_) => "brownian_drift",
            ModelSpec::JumpDiffusion(_) => "jump_diffusion",
            ModelSpec::VarianceGamma(_) => "variance_gamma",
        }
    }

    /// The same model with `η` replaced by `k η`.
    pub fn scale_eta(&self, k: f64) -> ModelSpec {
        match *self {
            ModelSpec::CpGaussian(p) => ModelSpec::CpGaussian(CpGaussianParams {
                gamma_eta: k * p.gamma_eta,
                mean_y: k * p.mean_y,
                cov_xy: k * p.cov_xy,
                var_y: k * k * p.var_y,
                ..p
            }),
            ModelSpec::BrownianDrift(p) => ModelSpec::BrownianDrift(BrownianDriftParams {
                gamma_eta: k * p.gamma_eta,
                cov_xi_eta: k * p.cov_xi_eta,
                var_eta: k * k * p.var_eta,
                ..p
            }),
            // η shares its randomness with ξ here; only the drift can be scaled
            // without changing ξ, so these two are not closed under scaling.
            other => other,
        }
    }
}

/// Lower-triangular factor of a 2×2 covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cholesky2 {
    pub l11: f64,
    pub l21: f64,
    pub l22: f64,
}

impl Cholesky2 {
    /// Factor of a positive semidefinite matrix; `None` if it is not PSD.
    fn semidefinite(a11: f64, a21: f64, a22: f64) -> Option<Self> {
        if a11 < 0.0 || a22 < 0.0 || a21 * a21 > a11 * a22 * (1.0 + 1e-12) {
            return None;
        }
        let l11 = a11.sqrt();
        let l21 = if l11 > 0.0 { a21 / l11 } else { 0.0 };
        let l22 = (a22 - l21 * l21).max(0.0).sqrt();
        Some(Cholesky2 { l11, l21, l22 })
    }

    #[inline]
    pub fn apply(&self, n1: f64, n2: f64) -> (f64, f64) {
        (self.l11 * n1, self.l21 * n1 + self.l22 * n2)
    }
}

fn positive_definite(a11: f64, a21: f64, a22: f64) -> bool {
    a11 > 0.0 && a22 > 0.0 && a11 * a22 - a21 * a21 > 0.0
}

fn require_finite(name: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter { name, reason: "must be finite" })
    }
}

/// A model whose parameters passed validation (or were admitted through
/// [`Model::unchecked`] for degenerate test oracles).
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    domain: ExponentDomain,
    checked: bool,
    chol: Cholesky2,
}

/// Validate a raw parameter record against its family's constraints.
pub fn validate(spec: ModelSpec) -> Result<Model, ModelError> {
    let model = Model::unchecked(spec)?;
    match spec {
        ModelSpec::CpGaussian(p) => {
            if p.lambda <= 0.0 {
                return Err(ModelError::NonPositiveIntensity);
            }
            if !positive_definite(p.var_x, p.cov_xy, p.var_y) {
                return Err(ModelError::NonPositiveDefinite);
            }
            let drift = p.gamma_xi + p.lambda * p.mean_x;
            if drift <= 0.0 {
                return Err(ModelError::DriftViolation { drift });
            }
        }
        ModelSpec::BrownianDrift(p) => {
            if p.gamma_xi <= 0.0 {
                return Err(ModelError::DriftViolation { drift: p.gamma_xi });
            }
            if !positive_definite(p.var_xi, p.cov_xi_eta, p.var_eta) {
                return Err(ModelError::NonPositiveDefinite);
            }
        }
        ModelSpec::JumpDiffusion(p) => {
            if p.lambda <= 0.0 {
                return Err(ModelError::NonPositiveIntensity);
            }
            if p.sigma2 <= 0.0 {
                return Err(ModelError::NonPositiveDefinite);
            }
            if p.gamma_xi <= 0.0 {
                return Err(ModelError::DriftViolation { drift: p.gamma_xi });
            }
            let jump_mean = match p.jump {
                JumpLaw::Gaussian { mean, .. } => mean,
                JumpLaw::Laplace { .. } => 0.0,
            };
            let drift = p.gamma_xi + p.lambda * jump_mean;
            if drift <= 0.0 {
                return Err(ModelError::DriftViolation { drift });
            }
        }
        ModelSpec::VarianceGamma(p) => {
            let drift = p.gamma_xi + p.shape * p.mu / p.rate;
            if drift <= 0.0 {
                return Err(ModelError::DriftViolation { drift });
            }
            if p.gamma_eta > 0.0 {
                return Err(ModelError::ConditionAViolation { gamma_eta: p.gamma_eta });
            }
        }
    }
    Ok(Model { checked: true, ..model })
}

impl Model {
    /// Admit a parameter record that only satisfies basic well-formedness
    /// (finite values, nonnegative intensities, semidefinite covariances).
    ///
    /// Degenerate members such as zero-variance marks, `λ = 0`, or the
    /// deterministic-drift model are accepted here and rejected by
    /// [`validate`]. Use for closed-form test oracles only.
    pub fn unchecked(spec: ModelSpec) -> Result<Model, ModelError> {
        let (domain, chol) = match spec {
            ModelSpec::CpGaussian(p) => {
                for (n, v) in [
                    ("gamma_xi", p.gamma_xi),
                    ("gamma_eta", p.gamma_eta),
                    ("lambda", p.lambda),
                    ("mean_x", p.mean_x),
                    ("mean_y", p.mean_y),
                    ("var_x", p.var_x),
                    ("cov_xy", p.cov_xy),
                    ("var_y", p.var_y),
                ] {
                    require_finite(n, v)?;
                }
                if p.lambda < 0.0 {
                    return Err(ModelError::NonPositiveIntensity);
                }
                let chol = Cholesky2::semidefinite(p.var_x, p.cov_xy, p.var_y)
                    .ok_or(ModelError::NonPositiveDefinite)?;
                (ExponentDomain::REAL_LINE, chol)
            }
            ModelSpec::BrownianDrift(p) => {
                for (n, v) in [
                    ("gamma_xi", p.gamma_xi),
                    ("gamma_eta", p.gamma_eta),
                    ("var_xi", p.var_xi),
                    ("cov_xi_eta", p.cov_xi_eta),
                    ("var_eta", p.var_eta),
                ] {
                    require_finite(n, v)?;
                }
                let chol = Cholesky2::semidefinite(p.var_xi, p.cov_xi_eta, p.var_eta)
                    .ok_or(ModelError::NonPositiveDefinite)?;
                (ExponentDomain::REAL_LINE, chol)
            }
            ModelSpec::JumpDiffusion(p) => {
                for (n, v) in [
                    ("gamma_xi", p.gamma_xi),
                    ("gamma_eta", p.gamma_eta),
                    ("sigma2", p.sigma2),
                    ("lambda", p.lambda),
                ] {
                    require_finite(n, v)?;
                }
                if p.lambda < 0.0 {
                    return Err(ModelError::NonPositiveIntensity);
                }
                if p.sigma2 < 0.0 {
                    return Err(ModelError::NonPositiveDefinite);
                }
                let domain = match p.jump {
                    JumpLaw::Gaussian { mean, var } => {
                        require_finite("mean_x", mean)?;
                        require_finite("var_x", var)?;
                        if var < 0.0 {
                            return Err(ModelError::InvalidParameter {
                                name: "var_x",
                                reason: "must be >= 0",
                            });
                        }
                        ExponentDomain::REAL_LINE
                    }
                    JumpLaw::Laplace { rho } => {
                        if !(rho.is_finite() && rho > 0.0) {
                            return Err(ModelError::InvalidParameter {
                                name: "rho",
                                reason: "must be finite and > 0",
                            });
                        }
                        if p.lambda > 0.0 {
                            ExponentDomain::singular(-rho, rho)
                        } else {
                            ExponentDomain::REAL_LINE
                        }
                    }
                };
                let s = p.sigma2.sqrt();
                (domain, Cholesky2 { l11: s, l21: s, l22: 0.0 })
            }
            ModelSpec::VarianceGamma(p) => {
                for (n, v) in [
                    ("gamma_xi", p.gamma_xi),
                    ("gamma_eta", p.gamma_eta),
                    ("mu", p.mu),
                    ("shape", p.shape),
                    ("rate", p.rate),
                ] {
                    require_finite(n, v)?;
                }
                if p.shape <= 0.0 {
                    return Err(ModelError::InvalidParameter { name: "shape", reason: "must be > 0" });
                }
                if p.rate <= 0.0 {
                    return Err(ModelError::NonPositiveIntensity);
                }
                let r = (p.mu * p.mu + 2.0 * p.rate).sqrt();
                (
                    ExponentDomain::singular(p.mu - r, p.mu + r),
                    Cholesky2 { l11: 1.0, l21: 0.0, l22: 0.0 },
                )
            }
        };
        Ok(Model { spec, domain, checked: false, chol })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn domain(&self) -> ExponentDomain {
        self.domain
    }

    /// Whether the model went through [`validate`].
    pub fn is_checked(&self) -> bool {
        self.checked
    }

    /// `c(α) = ln E e^{-α ξ_1}`.
    pub fn laplace_exponent(&self, alpha: f64) -> Result<f64, ModelError> {
        self.check_domain(alpha)?;
        Ok(self.exponent_unchecked(alpha))
    }

    /// `c(α)` with `+∞` outside the domain.
    pub fn laplace_exponent_extended(&self, alpha: f64) -> f64 {
        if self.domain.contains(alpha) {
            self.exponent_unchecked(alpha)
        } else {
            f64::INFINITY
        }
    }

    /// `(c'(α), c''(α))`.
    pub fn laplace_exponent_derivatives(&self, alpha: f64) -> Result<(f64, f64), ModelError> {
        self.check_domain(alpha)?;
        Ok(self.derivatives_unchecked(alpha))
    }

    fn check_domain(&self, alpha: f64) -> Result<(), ModelError> {
        if self.domain.contains(alpha) {
            Ok(())
        } else {
            Err(ModelError::OutOfDomain { alpha, domain: self.domain })
        }
    }

    fn exponent_unchecked(&self, a: f64) -> f64 {
        match self.spec {
            ModelSpec::CpGaussian(p) => {
                -a * p.gamma_xi + p.lambda * gaussian_mgf_minus_one(a, p.mean_x, p.var_x)
            }
            ModelSpec::BrownianDrift(p) => -a * p.gamma_xi + 0.5 * a * a * p.var_xi,
            ModelSpec::JumpDiffusion(p) => {
                let jumps = match p.jump {
                    JumpLaw::Gaussian { mean, var } => gaussian_mgf_minus_one(a, mean, var),
                    // ρ²/(ρ²-α²) - 1
                    JumpLaw::Laplace { rho } => a * a / (rho * rho - a * a),
                };
                -a * p.gamma_xi + 0.5 * a * a * p.sigma2 + p.lambda * jumps
            }
            ModelSpec::VarianceGamma(p) => {
                let g = vg_base(a, p);
                -a * p.gamma_xi - p.shape * g.ln()
            }
        }
    }

    fn derivatives_unchecked(&self, a: f64) -> (f64, f64) {
        match self.spec {
            ModelSpec::CpGaussian(p) => {
                let (d1, d2) = gaussian_mgf_derivatives(a, p.mean_x, p.var_x);
                (-p.gamma_xi + p.lambda * d1, p.lambda * d2)
            }
            ModelSpec::BrownianDrift(p) => (-p.gamma_xi + a * p.var_xi, p.var_xi),
            ModelSpec::JumpDiffusion(p) => {
                let (d1, d2) = match p.jump {
                    JumpLaw::Gaussian { mean, var } => gaussian_mgf_derivatives(a, mean, var),
                    JumpLaw::Laplace { rho } => {
                        let r2 = rho * rho;
                        let den = r2 - a * a;
                        (
                            2.0 * r2 * a / (den * den),
                            2.0 * r2 * (r2 + 3.0 * a * a) / (den * den * den),
                        )
                    }
                };
                (-p.gamma_xi + a * p.sigma2 + p.lambda * d1, p.sigma2 + p.lambda * d2)
            }
            ModelSpec::VarianceGamma(p) => {
                let g = vg_base(a, p);
                let g1 = (p.mu - a) / p.rate;
                let g2 = -1.0 / p.rate;
                (
                    -p.gamma_xi - p.shape * g1 / g,
                    -p.shape * (g2 * g - g1 * g1) / (g * g),
                )
            }
        }
    }

    /// `lim_{α ↑ hi} c'(α)`, evaluated analytically.
    pub fn derivative_limit_at_hi(&self) -> f64 {
        if self.domain.hi_singular {
            return f64::INFINITY;
        }
        match self.spec {
            ModelSpec::CpGaussian(p) => {
                cp_derivative_limit(p.gamma_xi, p.lambda, p.mean_x, p.var_x, 0.0, 1.0)
            }
            ModelSpec::BrownianDrift(p) => {
                if p.var_xi > 0.0 {
                    f64::INFINITY
                } else {
                    -p.gamma_xi
                }
            }
            ModelSpec::JumpDiffusion(p) => match p.jump {
                JumpLaw::Gaussian { mean, var } => {
                    cp_derivative_limit(p.gamma_xi, p.lambda, mean, var, p.sigma2, 1.0)
                }
                // λ = 0 here (otherwise the endpoint is singular).
                JumpLaw::Laplace { .. } => {
                    if p.sigma2 > 0.0 {
                        f64::INFINITY
                    } else {
                        -p.gamma_xi
                    }
                }
            },
            ModelSpec::VarianceGamma(_) => f64::INFINITY,
        }
    }

    /// `lim_{α ↓ lo} c'(α)`.
    pub fn derivative_limit_at_lo(&self) -> f64 {
        if self.domain.lo_singular {
            return f64::NEG_INFINITY;
        }
        match self.spec {
            ModelSpec::CpGaussian(p) => {
                cp_derivative_limit(p.gamma_xi, p.lambda, p.mean_x, p.var_x, 0.0, -1.0)
            }
            ModelSpec::BrownianDrift(p) => {
                if p.var_xi > 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -p.gamma_xi
                }
            }
            ModelSpec::JumpDiffusion(p) => match p.jump {
                JumpLaw::Gaussian { mean, var } => {
                    cp_derivative_limit(p.gamma_xi, p.lambda, mean, var, p.sigma2, -1.0)
                }
                JumpLaw::Laplace { .. } => {
                    if p.sigma2 > 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        -p.gamma_xi
                    }
                }
            },
            ModelSpec::VarianceGamma(_) => f64::NEG_INFINITY,
        }
    }

    /// Intensity of the finite-activity jump part (0 if none).
    pub fn jump_intensity(&self) -> f64 {
        match self.spec {
            ModelSpec::CpGaussian(p) => p.lambda,
            ModelSpec::JumpDiffusion(p) => p.lambda,
            _ => 0.0,
        }
    }

    /// Whether `(ξ, η)` is piecewise linear between jumps.
    pub fn is_piecewise_linear(&self) -> bool {
        matches!(self.spec, ModelSpec::CpGaussian(_))
    }

    /// Draw one jump mark `(ΔX, ΔY)`.
    pub fn sample_jump_mark<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match self.spec {
            ModelSpec::CpGaussian(p) => {
                let n1: f64 = StandardNormal.sample(rng);
                let n2: f64 = StandardNormal.sample(rng);
                let (x, y) = self.chol.apply(n1, n2);
                (p.mean_x + x, p.mean_y + y)
            }
            ModelSpec::JumpDiffusion(p) => {
                let x = match p.jump {
                    JumpLaw::Gaussian { mean, var } => {
                        let n: f64 = StandardNormal.sample(rng);
                        mean + var.sqrt() * n
                    }
                    JumpLaw::Laplace { rho } => {
                        let e: f64 = Exp1.sample(rng);
                        if rng.random::<bool>() {
                            e / rho
                        } else {
                            -e / rho
                        }
                    }
                };
                (x, 0.0)
            }
            _ => (0.0, 0.0),
        }
    }

    /// Exact increment of the continuous (non-compound-Poisson) part over `dt`.
    ///
    /// For the variance-gamma model this is the whole increment, since its
    /// jumps are carried by the exactly sampled gamma clock.
    pub fn sample_continuous<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> (f64, f64) {
        match self.spec {
            ModelSpec::CpGaussian(p) => (p.gamma_xi * dt, p.gamma_eta * dt),
            ModelSpec::BrownianDrift(p) => {
                let s = dt.sqrt();
                let n1: f64 = StandardNormal.sample(rng);
                let n2: f64 = StandardNormal.sample(rng);
                let (bx, be) = self.chol.apply(n1, n2);
                (p.gamma_xi * dt + s * bx, p.gamma_eta * dt + s * be)
            }
            ModelSpec::JumpDiffusion(p) => {
                let n: f64 = StandardNormal.sample(rng);
                let b = (p.sigma2 * dt).sqrt() * n;
                (p.gamma_xi * dt + b, p.gamma_eta * dt + b)
            }
            ModelSpec::VarianceGamma(p) => {
                let clock = Gamma::new(p.shape * dt, 1.0 / p.rate)
                    .expect("validated gamma parameters");
                vg_increment(p, dt, clock.sample(rng), rng)
            }
        }
    }

    /// Exact joint increment `(Δξ, Δη)` over `(0, dt]` with its jump list.
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Increment {
        assert!(dt > 0.0, "time step must be positive");
        let lambda = self.jump_intensity();
        let mut jumps = Vec::new();
        if lambda > 0.0 {
            let arrivals = Exp::new(lambda).expect("positive intensity");
            let mut t = arrivals.sample(rng);
            while t <= dt {
                let (dx, dy) = self.sample_jump_mark(rng);
                jumps.push(Jump { time: t, dxi: dx, deta: dy });
                t += arrivals.sample(rng);
            }
        }
        let (mut dxi, mut deta) = self.sample_continuous(dt, rng);
        for j in &jumps {
            dxi += j.dxi;
            deta += j.deta;
        }
        Increment { dxi, deta, jumps }
    }
}

/// One compound-Poisson jump inside a sampled increment; `time` is relative
/// to the start of the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub dxi: f64,
    pub deta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Increment {
    pub dxi: f64,
    pub deta: f64,
    pub jumps: Vec<Jump>,
}

#[inline]
pub(crate) fn vg_increment<R: Rng + ?Sized>(
    p: VarianceGammaParams,
    dt: f64,
    ds: f64,
    rng: &mut R,
) -> (f64, f64) {
    let n: f64 = StandardNormal.sample(rng);
    (p.gamma_xi * dt + ds.sqrt() * n + p.mu * ds, p.gamma_eta * dt + ds)
}

/// `E e^{-αX} - 1` for `X ~ N(m, s²)`.
fn gaussian_mgf_minus_one(a: f64, m: f64, s2: f64) -> f64 {
    (-m * a + 0.5 * s2 * a * a).exp_m1()
}

/// First and second derivatives in `α` of `E e^{-αX}` for `X ~ N(m, s²)`.
fn gaussian_mgf_derivatives(a: f64, m: f64, s2: f64) -> (f64, f64) {
    let e = (-m * a + 0.5 * s2 * a * a).exp();
    let k = -m + s2 * a;
    (k * e, (s2 + k * k) * e)
}

/// Limit of `-γ + ασ² + λ (s²α - m) e^{-mα + s²α²/2}` as `α → ±∞`.
fn cp_derivative_limit(gamma: f64, lambda: f64, m: f64, s2: f64, sigma2: f64, dir: f64) -> f64 {
    let inf = dir * f64::INFINITY;
    if sigma2 > 0.0 {
        return inf;
    }
    if lambda > 0.0 {
        if s2 > 0.0 {
            return inf;
        }
        // Degenerate marks: λ(-m) e^{-mα}.
        if m * dir < 0.0 {
            return inf;
        }
    }
    -gamma
}

#[inline]
fn vg_base(a: f64, p: VarianceGammaParams) -> f64 {
    1.0 + a * p.mu / p.rate - a * a / (2.0 * p.rate)
}
