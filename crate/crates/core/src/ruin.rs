//! Monte Carlo estimators for the ruin probability `ψ(z) = P(inf_t Z_t < -z)`,
//! the ruin-time law `P(T_z ≤ x ln z)`, the Cramér constant `C₋`, and the
//! regression diagnostics that compare them with the power-law asymptotics.
//!
//! Paths are run until every requested level is ruined, or `ξ_t ≥ Θ` (after
//! which `e^{-ξ}` contributions are negligible), or `t ≥ t_max`. One path
//! serves every level, so estimates at different levels share random numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cramer::{self, ConditionReport, CramerError, CramerProfile, Verdict};
use crate::levy::Model;
use crate::paths::{IntegrationScheme, Stepper};
use crate::rng::{self, Purpose};
use crate::stats::{self, Z95};

/// Paths per parallel work unit.
const CHUNK: u64 = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuinError {
    #[error("n_paths must be positive")]
    ZeroPaths,
    #[error("grid must be nonempty, finite and strictly increasing")]
    UnsortedGrid,
    #[error("condition gate: {0}")]
    ConditionGate(String),
    #[error("only {usable} grid points have at least 10 ruined paths (need 4)")]
    InsufficientRuins { usable: usize },
    #[error("alpha = {alpha} lies outside the exponent domain")]
    OutOfDomain { alpha: f64 },
    #[error("x = {x} is not above x0 = {x0}")]
    BelowX0 { x: f64, x0: f64 },
    #[error("invalid setting: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Cramer(#[from] CramerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinConfig {
    pub n_paths: u64,
    pub seed: u64,
    pub h: f64,
    /// Stop once `ξ_t ≥ theta`.
    pub theta: f64,
    pub t_max: f64,
    /// Worker threads (0 = all cores).
    pub workers: usize,
    /// Proceed even when the condition checks are not all verified.
    pub force: bool,
}

impl RuinConfig {
    pub fn new(n_paths: u64, seed: u64) -> Self {
        RuinConfig {
            n_paths,
            seed,
            h: 1.0 / 256.0,
            theta: 30.0,
            t_max: 200.0,
            workers: 0,
            force: false,
        }
    }

    fn check(&self) -> Result<(), RuinError> {
        if self.n_paths == 0 {
            return Err(RuinError::ZeroPaths);
        }
        if !(self.h > 0.0 && self.t_max >= self.h && self.t_max.is_finite() && self.theta > 0.0) {
            return Err(RuinError::InvalidConfig(format!(
                "need h > 0, t_max >= h and theta > 0 (h = {}, t_max = {}, theta = {})",
                self.h, self.t_max, self.theta
            )));
        }
        Ok(())
    }
}

/// Condition report for `model`, and whether estimation may proceed.
pub fn condition_gate(model: &Model, force: bool, need_all: bool) -> Result<ConditionReport, RuinError> {
    let profile = cramer::lundberg_and_profile(model).ok();
    let report = cramer::check_conditions(model, profile.as_ref());
    if force {
        return Ok(report);
    }
    let blocking: Vec<String> = [("A", &report.cond_a), ("B", &report.cond_b), ("C", &report.cond_c)]
        .into_iter()
        .filter(|(name, c)| c.verdict != Verdict::Verified && (need_all || *name == "A"))
        .map(|(name, c)| format!("condition {name} {:?}: {}", c.verdict, c.reason))
        .collect();
    if !model.is_checked() {
        return Err(RuinError::ConditionGate("model was admitted without validation".into()));
    }
    if blocking.is_empty() {
        Ok(report)
    } else {
        Err(RuinError::ConditionGate(blocking.join("; ")))
    }
}

fn check_grid(grid: &[f64]) -> Result<(), RuinError> {
    let ok = !grid.is_empty()
        && grid.iter().all(|v| v.is_finite())
        && grid.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(RuinError::UnsortedGrid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    AllRuined,
    Theta,
    TMax,
}

/// Run one path against ascending levels; `first[j]` receives the first
/// passage time below `-levels[j]` (or `∞`).
fn run_ruin_path(model: &Model, levels: &[f64], cfg: &RuinConfig, scheme: IntegrationScheme, id: u64, first: &mut [f64]) -> (Stop, bool) {
    first.fill(f64::INFINITY);
    let mut st = Stepper::new(model, scheme, rng::stream(cfg.seed, Purpose::RuinPath, id));
    let mut next = 0;
    let mut min = 0.0f64;
    let mut k = 0u64;
    let stop = 'outer: loop {
        if st.xi >= cfg.theta {
            break Stop::Theta;
        }
        if st.t >= cfg.t_max {
            break Stop::TMax;
        }
        k += 1;
        let target = (k as f64 * cfg.h).min(cfg.t_max);
        while st.t < target {
            let out = st.advance(target);
            let lo = out.pre_jump_z.min(st.z);
            if lo < min {
                min = lo;
                while next < levels.len() && min < -levels[next] {
                    first[next] = st.t;
                    next += 1;
                }
                if next == levels.len() {
                    break 'outer Stop::AllRuined;
                }
            }
            if st.xi >= cfg.theta {
                break 'outer Stop::Theta;
            }
        }
    };
    (stop, st.underflow)
}

#[derive(Debug, Clone, PartialEq)]
struct Tally {
    ruined: Vec<u64>,
    censored: Vec<u64>,
    theta_stopped: Vec<u64>,
    /// `by_time[j][i]`: paths with first passage below `-levels[j]` no later
    /// than `thresholds[j][i]`.
    by_time: Vec<Vec<u64>>,
    underflow: u64,
}

impl Tally {
    fn new(thresholds: &[Vec<f64>]) -> Self {
        let n = thresholds.len();
        Tally {
            ruined: vec![0; n],
            censored: vec![0; n],
            theta_stopped: vec![0; n],
            by_time: thresholds.iter().map(|t| vec![0; t.len()]).collect(),
            underflow: 0,
        }
    }

    fn merge(&mut self, o: &Tally) {
        let add = |a: &mut Vec<u64>, b: &Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.ruined, &o.ruined);
        add(&mut self.censored, &o.censored);
        add(&mut self.theta_stopped, &o.theta_stopped);
        for (a, b) in self.by_time.iter_mut().zip(&o.by_time) {
            add(a, b);
        }
        self.underflow += o.underflow;
    }
}

/// Simulate `cfg.n_paths` ruin paths and count passages per level.
/// `levels` must be ascending; `thresholds[j]` are time cut-offs for level j.
fn tally(model: &Model, levels: &[f64], thresholds: &[Vec<f64>], cfg: &RuinConfig) -> Tally {
    let scheme = IntegrationScheme::default_for(model);
    let chunks = cfg.n_paths.div_ceil(CHUNK);
    let parts: Vec<Tally> = rng::with_workers(cfg.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut t = Tally::new(thresholds);
                let mut first = vec![f64::INFINITY; levels.len()];
                for id in c * CHUNK..((c + 1) * CHUNK).min(cfg.n_paths) {
                    let (stop, underflow) = run_ruin_path(model, levels, cfg, scheme, id, &mut first);
                    t.underflow += underflow as u64;
                    for j in 0..levels.len() {
                        if first[j].is_finite() {
                            t.ruined[j] += 1;
                            for (i, &thr) in thresholds[j].iter().enumerate() {
                                t.by_time[j][i] += (first[j] <= thr) as u64;
                            }
                        } else if stop == Stop::TMax {
                            t.censored[j] += 1;
                        } else {
                            t.theta_stopped[j] += 1;
                        }
                    }
                }
                t
            })
            .collect()
    });
    let mut total = Tally::new(thresholds);
    for p in &parts {
        total.merge(p);
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinPoint {
    pub z: f64,
    pub psi_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_paths: u64,
    pub n_ruined: u64,
    /// Non-ruined paths stopped by `t ≥ t_max`.
    pub censored_frac: f64,
    /// Non-ruined paths stopped by `ξ ≥ Θ`, whose remaining contributions
    /// to `Z` were dropped.
    pub underflow_frac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinCurve {
    pub points: Vec<RuinPoint>,
    pub theta: f64,
    pub t_max: f64,
    pub h: f64,
    pub seed: u64,
}

impl RuinCurve {
    pub const CSV_HEADER: &'static str = "z,psi_hat,ci_lo,ci_hi,n_paths,n_ruined,censored_frac,underflow_frac";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                p.z, p.psi_hat, p.ci_lo, p.ci_hi, p.n_paths, p.n_ruined, p.censored_frac, p.underflow_frac
            ));
        }
        s
    }
}

fn ruin_point(z: f64, n: u64, ruined: u64, censored: u64, theta_stopped: u64) -> RuinPoint {
    let (ci_lo, ci_hi) = stats::wilson_interval(ruined, n);
    RuinPoint {
        z,
        psi_hat: ruined as f64 / n as f64,
        ci_lo,
        ci_hi,
        n_paths: n,
        n_ruined: ruined,
        censored_frac: censored as f64 / n as f64,
        underflow_frac: theta_stopped as f64 / n as f64,
    }
}

/// `ψ̂(z)` with Wilson intervals on an ascending grid of initial values.
pub fn estimate_ruin_curve(model: &Model, z_grid: &[f64], cfg: &RuinConfig) -> Result<RuinCurve, RuinError> {
    cfg.check()?;
    check_grid(z_grid)?;
    condition_gate(model, cfg.force, false)?;
    let thresholds = vec![Vec::new(); z_grid.len()];
    let t = tally(model, z_grid, &thresholds, cfg);
    let points = z_grid
        .iter()
        .enumerate()
        .map(|(j, &z)| ruin_point(z, cfg.n_paths, t.ruined[j], t.censored[j], t.theta_stopped[j]))
        .collect();
    Ok(RuinCurve { points, theta: cfg.theta, t_max: cfg.t_max, h: cfg.h, seed: cfg.seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinTimePoint {
    pub x: f64,
    /// `x ln z`.
    pub threshold: f64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_hits: u64,
    /// `(ln z)^{-1} ln p̂`, `-∞` when no path was ruined in time.
    pub normalized_log: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinTimeCdf {
    pub z: f64,
    pub n_paths: u64,
    pub psi_hat: f64,
    pub points: Vec<RuinTimePoint>,
}

impl RuinTimeCdf {
    pub const CSV_HEADER: &'static str = "x,threshold,p_hat,ci_lo,ci_hi,n_hits,normalized_log";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.x, p.threshold, p.p_hat, p.ci_lo, p.ci_hi, p.n_hits, p.normalized_log
            ));
        }
        s
    }
}

/// Empirical `P(T_z ≤ x ln z)` on an ascending `x` grid.
pub fn estimate_ruin_time_cdf(model: &Model, z: f64, x_grid: &[f64], cfg: &RuinConfig) -> Result<RuinTimeCdf, RuinError> {
    cfg.check()?;
    check_grid(x_grid)?;
    if !(z > 1.0) {
        return Err(RuinError::InvalidConfig(format!("z = {z} must exceed 1 so that ln z > 0")));
    }
    let x0 = cramer::lundberg_and_profile(model).map(|p| p.x0).unwrap_or(0.0);
    if let Some(&x) = x_grid.iter().find(|&&x| !(x > x0)) {
        return Err(RuinError::BelowX0 { x, x0 });
    }
    condition_gate(model, cfg.force, false)?;
    let lz = z.ln();
    let thresholds = vec![x_grid.iter().map(|x| x * lz).collect::<Vec<_>>()];
    let t = tally(model, &[z], &thresholds, cfg);
    let n = cfg.n_paths;
    let points = x_grid
        .iter()
        .zip(&thresholds[0])
        .zip(&t.by_time[0])
        .map(|((&x, &threshold), &hits)| {
            let (ci_lo, ci_hi) = stats::wilson_interval(hits, n);
            let p_hat = hits as f64 / n as f64;
            RuinTimePoint { x, threshold, p_hat, ci_lo, ci_hi, n_hits: hits, normalized_log: p_hat.ln() / lz }
        })
        .collect();
    Ok(RuinTimeCdf { z, n_paths: n, psi_hat: t.ruined[0] as f64 / n as f64, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub h: f64,
    pub theta: f64,
    pub t_max: f64,
    pub blocks: usize,
    pub workers: usize,
    pub force: bool,
}

impl ConstantConfig {
    pub fn from_ruin(cfg: &RuinConfig, n_samples: u64) -> Self {
        ConstantConfig {
            n_samples,
            seed: cfg.seed,
            h: cfg.h,
            theta: cfg.theta,
            t_max: cfg.t_max,
            blocks: 20,
            workers: cfg.workers,
            force: cfg.force,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CramerConstant {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub block_means: Vec<f64>,
    /// Coefficient of variation of the block means exceeded 1.
    pub non_finite_moment: bool,
    pub n_samples: u64,
    pub w: f64,
    pub mu_star: f64,
}

/// One coupled sample of `(M, Q, L̄)` over `(0, 1]`.
fn unit_triple(model: &Model, cfg: &ConstantConfig, scheme: IntegrationScheme, id: u64) -> (f64, f64, f64) {
    let mut st = Stepper::new(model, scheme, rng::stream(cfg.seed, Purpose::UnitInterval, id));
    let mut inf = f64::INFINITY;
    let mut k = 0u64;
    while st.t < 1.0 {
        k += 1;
        let target = (k as f64 * cfg.h).min(1.0);
        while st.t < target {
            let out = st.advance(target);
            inf = inf.min(out.pre_jump_z.min(st.z));
        }
    }
    let inc = st.z;
    let e1 = st.xi.exp();
    let m = (-st.xi).exp();
    (m, inc, -e1 * (inc - inf))
}

/// `inf_{t>0} Z_t` along an independent long path, run until `ξ ≥ Θ` or
/// `t ≥ t_max`.
fn infimum_tail(model: &Model, cfg: &ConstantConfig, scheme: IntegrationScheme, id: u64) -> f64 {
    let mut st = Stepper::new(model, scheme, rng::stream(cfg.seed, Purpose::InfimumTail, id));
    let mut inf = 0.0f64;
    let mut k = 0u64;
    while st.xi < cfg.theta && st.t < cfg.t_max {
        k += 1;
        let target = (k as f64 * cfg.h).min(cfg.t_max);
        while st.t < target {
            let out = st.advance(target);
            inf = inf.min(out.pre_jump_z.min(st.z));
        }
    }
    inf
}

fn neg_part(x: f64) -> f64 {
    (-x).max(0.0)
}

/// The bracket `((Q + M min{L̄, I})⁻)^w - ((M I)⁻)^w` for one coupled sample.
pub fn constant_bracket(m: f64, q: f64, lbar: f64, inf: f64, w: f64) -> f64 {
    neg_part(q + m * lbar.min(inf)).powf(w) - neg_part(m * inf).powf(w)
}

/// Per-sample brackets in path-id order.
pub fn constant_samples(model: &Model, w: f64, cfg: &ConstantConfig) -> Vec<f64> {
    let scheme = IntegrationScheme::default_for(model);
    rng::with_workers(cfg.workers, || {
        (0..cfg.n_samples as usize)
            .into_par_iter()
            .with_min_len(256)
            .map(|id| {
                let id = id as u64;
                let (m, q, lbar) = unit_triple(model, cfg, scheme, id);
                let inf = infimum_tail(model, cfg, scheme, id);
                constant_bracket(m, q, lbar, inf, w)
            })
            .collect()
    })
}

/// Median-of-means estimate of `C₋` from the coupled brackets.
pub fn estimate_cramer_constant(model: &Model, profile: &CramerProfile, cfg: &ConstantConfig) -> Result<CramerConstant, RuinError> {
    if cfg.n_samples == 0 {
        return Err(RuinError::ZeroPaths);
    }
    if cfg.blocks == 0 || (cfg.n_samples as usize) < cfg.blocks {
        return Err(RuinError::InvalidConfig(format!(
            "need at least one sample per block ({} samples, {} blocks)",
            cfg.n_samples, cfg.blocks
        )));
    }
    if !(cfg.h > 0.0 && cfg.h <= 1.0) {
        return Err(RuinError::InvalidConfig(format!("need 0 < h <= 1 (h = {})", cfg.h)));
    }
    condition_gate(model, cfg.force, true)?;
    if !(profile.mu_star.is_finite() && profile.mu_star > 0.0) {
        return Err(RuinError::InvalidConfig(format!("mu_star = {} is not finite and positive", profile.mu_star)));
    }
    let samples = constant_samples(model, profile.w, cfg);
    let b = cfg.blocks;
    let mut sums = vec![0.0; b];
    let mut counts = vec![0u64; b];
    for (id, v) in samples.iter().enumerate() {
        sums[id % b] += v;
        counts[id % b] += 1;
    }
    let scale = profile.w * profile.mu_star;
    let block_means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &n)| s / n as f64 / scale).collect();
    let centre = stats::median(&block_means);
    let sd = stats::variance(&block_means).sqrt();
    // sd of the median of B roughly-normal means ≈ 1.2533 σ/√B.
    let half = Z95 * 1.2533 * sd / (b as f64).sqrt();
    let mean = stats::mean(&block_means);
    Ok(CramerConstant {
        estimate: centre,
        ci_lo: centre - half,
        ci_hi: centre + half,
        non_finite_moment: !(sd <= mean.abs()),
        n_samples: cfg.n_samples,
        w: profile.w,
        mu_star: profile.mu_star,
        block_means,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauPoint {
    pub z: f64,
    /// `z^w ψ̂(z)`.
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CramerFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    /// Grid values used in the regression.
    pub z_used: Vec<f64>,
    pub plateau: Vec<PlateauPoint>,
    /// Max over min of the plateau values with `ψ̂ > 0`.
    pub plateau_ratio: f64,
    pub w: f64,
    pub mu_star: Option<f64>,
    pub constant: Option<CramerConstant>,
}

impl CramerFit {
    /// Mean of the plateau over the top `k` grid points with an interval from
    /// the Wilson bounds.
    pub fn plateau_top(&self, k: usize) -> (f64, f64, f64) {
        let top = &self.plateau[self.plateau.len().saturating_sub(k)..];
        let n = top.len() as f64;
        let avg = |f: fn(&PlateauPoint) -> f64| top.iter().map(f).sum::<f64>() / n;
        (avg(|p| p.value), avg(|p| p.ci_lo), avg(|p| p.ci_hi))
    }
}

/// Minimum ruined paths for a grid point to enter the regression.
pub const MIN_RUINS: u64 = 10;

/// Weighted least squares of `ln ψ̂` on `ln z` plus the `z^w ψ̂` plateau.
pub fn fit_cramer_asymptotics(curve: &RuinCurve, w: f64) -> Result<CramerFit, RuinError> {
    let used: Vec<&RuinPoint> = curve.points.iter().filter(|p| p.n_ruined >= MIN_RUINS).collect();
    if used.len() < 4 {
        return Err(RuinError::InsufficientRuins { usable: used.len() });
    }
    // Var(ln ψ̂) ≈ (1 - ψ)/(n ψ).
    let pts: Vec<(f64, f64, f64)> = used
        .iter()
        .map(|p| {
            let wt = if p.psi_hat < 1.0 {
                p.n_paths as f64 * p.psi_hat / (1.0 - p.psi_hat)
            } else {
                p.n_paths as f64
            };
            (p.z.ln(), p.psi_hat.ln(), wt)
        })
        .collect();
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.0 - xm)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let plateau: Vec<PlateauPoint> = curve
        .points
        .iter()
        .map(|p| {
            let s = p.z.powf(w);
            PlateauPoint { z: p.z, value: s * p.psi_hat, ci_lo: s * p.ci_lo, ci_hi: s * p.ci_hi }
        })
        .collect();
    let positive: Vec<f64> = plateau.iter().map(|p| p.value).filter(|&v| v > 0.0).collect();
    let plateau_ratio = positive.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        / positive.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CramerFit {
        slope,
        slope_se: (1.0 / sxx).sqrt(),
        intercept: ym - slope * xm,
        z_used: used.iter().map(|p| p.z).collect(),
        plateau,
        plateau_ratio,
        w,
        mu_star: None,
        constant: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCheck {
    pub alpha: f64,
    pub exact: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z_score: f64,
    /// Second moment infinite or a single draw dominates the mean.
    pub unstable: bool,
    pub max_share: f64,
}

/// Compare `ln mean(e^{-α ξ_1})` over `n` unit increments with `c(α)`.
pub fn empirical_laplace_check(model: &Model, alphas: &[f64], n: usize, seed: u64) -> Result<Vec<LaplaceCheck>, RuinError> {
    let d = model.domain();
    if let Some(&alpha) = alphas.iter().find(|&&a| !d.contains(a)) {
        return Err(RuinError::OutOfDomain { alpha });
    }
    if n < 2 {
        return Err(RuinError::ZeroPaths);
    }
    let mut rng = rng::stream(seed, Purpose::Increments, 0);
    let xs: Vec<f64> = (0..n).map(|_| model.sample_increment(1.0, &mut rng).dxi).collect();
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let terms: Vec<f64> = xs.iter().map(|x| (-alpha * x).exp()).collect();
            let sum: f64 = terms.iter().sum();
            let m = sum / n as f64;
            let estimate = m.ln();
            let se = stats::variance(&terms).sqrt() / (n as f64).sqrt() / m;
            let exact = model.laplace_exponent(alpha).expect("inside domain");
            let z_score = if se > 0.0 { (estimate - exact) / se } else { 0.0 };
            let max_share = terms.iter().copied().fold(0.0, f64::max) / sum;
            LaplaceCheck {
                alpha,
                exact,
                estimate,
                std_error: se,
                z_score,
                unstable: !d.contains(2.0 * alpha) || max_share > 0.05,
                max_share,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_examples() {
        // Q + M min{L̄, I} = 1 - 3 = -2, M I = -2.
        assert_eq!(constant_bracket(1.0, 1.0, -3.0, -2.0, 1.0), 0.0);
        assert_eq!(constant_bracket(1.0, -1.0, -3.0, -0.5, 1.0), 4.0 - 0.5);
        assert_eq!(constant_bracket(2.0, 5.0, 0.0, 0.0, 2.0), 0.0);
    }

    #[test]
    fn fit_rejects_sparse_curves() {
        let curve = RuinCurve {
            points: (1..=5)
                .map(|i| ruin_point(i as f64, 100, if i < 3 { 20 } else { 5 }, 0, 0))
                .collect(),
            theta: 30.0,
            t_max: 200.0,
            h: 0.01,
            seed: 0,
        };
        assert_eq!(fit_cramer_asymptotics(&curve, 1.0), Err(RuinError::InsufficientRuins { usable: 2 }));
    }

    #[test]
    fn csv_header_is_stable() {
        let curve = RuinCurve { points: vec![ruin_point(2.0, 10, 1, 2, 3)], theta: 30.0, t_max: 200.0, h: 0.01, seed: 0 };
        let csv = curve.to_csv();
        assert!(csv.starts_with("z,psi_hat,ci_lo,ci_hi,n_paths,n_ruined,censored_frac,underflow_frac\n"));
        assert_eq!(csv.lines().count(), 2);
    }
}
