//! Joint trajectories of `(ξ, η)`, the integral process
//! `Z_t = ∫_0^t e^{-ξ_{s-}} dη_s`, the GOU process and its unit-interval
//! embedding.
//!
//! Paths live on a hybrid grid: the uniform mesh `{0, h, 2h, …}` plus the
//! exact arrival times of compound-Poisson jumps. `Z` is accumulated with
//! left-point sums whose integrand at a jump is the pre-jump value
//! `e^{-ξ(τ-)}`. Between jumps of the compound-Poisson Gaussian model `ξ` and
//! `η` are linear, and the segment integral is taken in closed form instead.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levy::{vg_increment, Model, ModelSpec};
use crate::rng::{self, Purpose, Stream};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("invalid grid: horizon {horizon}, step {h} (need 0 < h <= horizon)")]
    InvalidGrid { horizon: f64, h: f64 },
    #[error("initial value v0 = {v0} is negative")]
    NegativeInitialValue { v0: f64 },
    #[error("the unit-interval embedding needs an integer horizon and integer grid points (horizon {horizon}, h {h})")]
    NonIntegerHorizon { horizon: f64, h: f64 },
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { got: usize, need: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationScheme {
    /// Left-point sums on every grid cell.
    LeftPoint,
    /// Closed-form integral over linear segments between jumps (compound
    /// Poisson Gaussian model only; other models fall back to left-point).
    EventExact,
}

impl IntegrationScheme {
    pub fn default_for(model: &Model) -> Self {
        if model.is_piecewise_linear() {
            IntegrationScheme::EventExact
        } else {
            IntegrationScheme::LeftPoint
        }
    }
}

/// Horizon and mesh width of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub horizon: f64,
    pub h: f64,
}

impl GridSpec {
    pub fn new(horizon: f64, h: f64) -> Result<Self, PathError> {
        if !(h > 0.0 && horizon >= h && horizon.is_finite()) {
            return Err(PathError::InvalidGrid { horizon, h });
        }
        Ok(GridSpec { horizon, h })
    }

    /// Uniform mesh points in `(0, horizon]`, ending exactly at the horizon.
    pub(crate) fn mesh_point(&self, k: usize) -> f64 {
        (k as f64 * self.h).min(self.horizon)
    }

    pub(crate) fn mesh_len(&self) -> usize {
        let k = (self.horizon / self.h).floor() as usize;
        if (k as f64 * self.h) < self.horizon {
            k + 1
        } else {
            k
        }
    }
}

/// Outcome of one [`Stepper::advance`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// A compound-Poisson jump happened at the new time.
    pub jumped: bool,
    /// `Z` just before the jump (equals the new `Z` when there was none).
    pub pre_jump_z: f64,
}

/// Incremental simulator of `(t, ξ, η, Z)`.
///
/// Each call to [`advance`](Stepper::advance) moves to the earlier of the
/// requested target and the next jump time.
pub struct Stepper<'m, R: Rng> {
    model: &'m Model,
    scheme: IntegrationScheme,
    rng: R,
    arrivals: Option<Exp<f64>>,
    next_jump: f64,
    clock: Option<(f64, Gamma<f64>)>,
    pub t: f64,
    pub xi: f64,
    pub eta: f64,
    pub z: f64,
    /// Set once `e^{-ξ}` underflowed (or overflowed) and its contribution was
    /// dropped.
    pub underflow: bool,
}

impl<'m, R: Rng> Stepper<'m, R> {
    pub fn new(model: &'m Model, scheme: IntegrationScheme, mut rng: R) -> Self {
        let lambda = model.jump_intensity();
        let arrivals = (lambda > 0.0).then(|| Exp::new(lambda).expect("positive intensity"));
        let next_jump = match &arrivals {
            Some(e) => e.sample(&mut rng),
            None => f64::INFINITY,
        };
        Stepper {
            model,
            scheme,
            rng,
            arrivals,
            next_jump,
            clock: None,
            t: 0.0,
            xi: 0.0,
            eta: 0.0,
            z: 0.0,
            underflow: false,
        }
    }

    /// Next scheduled jump time (`∞` for models without compound-Poisson
    /// jumps).
    pub fn next_jump(&self) -> f64 {
        self.next_jump
    }

    fn discount(&mut self) -> f64 {
        let g = (-self.xi).exp();
        if g == 0.0 || !g.is_finite() {
            self.underflow = true;
            0.0
        } else {
            g
        }
    }

    fn continuous(&mut self, dt: f64) -> (f64, f64) {
        if let ModelSpec::VarianceGamma(p) = *self.model.spec() {
            let law = match self.clock {
                Some((cached, law)) if cached == dt => law,
                _ => {
                    let law = Gamma::new(p.shape * dt, 1.0 / p.rate).expect("validated gamma parameters");
                    self.clock = Some((dt, law));
                    law
                }
            };
            let ds = law.sample(&mut self.rng);
            return vg_increment(p, dt, ds, &mut self.rng);
        }
        self.model.sample_continuous(dt, &mut self.rng)
    }

    pub fn advance(&mut self, target: f64) -> StepOutcome {
        let end = target.min(self.next_jump);
        let dt = end - self.t;
        if dt > 0.0 {
            let (dxi, deta) = self.continuous(dt);
            if deta != 0.0 {
                let g = self.discount();
                let integral = match (self.scheme, self.model.spec()) {
                    (IntegrationScheme::EventExact, ModelSpec::CpGaussian(p)) => {
                        let gx = p.gamma_xi;
                        let frac = if gx != 0.0 { -(-gx * dt).exp_m1() / gx } else { dt };
                        p.gamma_eta * g * frac
                    }
                    _ => g * deta,
                };
                self.z += integral;
            }
            self.xi += dxi;
            self.eta += deta;
            self.t = end;
        }
        if end < self.next_jump {
            return StepOutcome { jumped: false, pre_jump_z: self.z };
        }
        let pre_jump_z = self.z;
        let (dx, dy) = self.model.sample_jump_mark(&mut self.rng);
        if dy != 0.0 {
            let g = self.discount();
            self.z += g * dy;
        }
        self.xi += dx;
        self.eta += dy;
        self.t = end;
        let gap = self.arrivals.as_ref().expect("jump without intensity").sample(&mut self.rng);
        self.next_jump = end + gap;
        StepOutcome { jumped: true, pre_jump_z }
    }
}

/// Hybrid simulation grid: mesh plus inserted jump times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimGrid {
    pub horizon: f64,
    pub h: f64,
    pub jump_times: Vec<f64>,
}

/// One simulated trajectory on its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub grid: SimGrid,
    pub scheme: IntegrationScheme,
    /// Grid times, starting at 0.
    pub t: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub z: Vec<f64>,
    pub runmin_z: Vec<f64>,
    /// `(seed, path id)` when built from a derived stream.
    pub provenance: Option<(u64, u64)>,
    pub underflow: bool,
}

impl PathBundle {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Index of grid time `t`, if it is a grid point.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.t.binary_search_by(|x| x.total_cmp(&t)).ok()
    }

    /// Keep every `factor`-th mesh point and rebuild `Z` by left-point sums
    /// on the thinned grid. Only defined for paths without inserted jump
    /// times.
    pub fn coarsen(&self, factor: usize) -> Option<PathBundle> {
        if factor == 0 || !self.grid.jump_times.is_empty() {
            return None;
        }
        let last = self.t.len() - 1;
        let keep: Vec<usize> = (0..=last).step_by(factor).collect();
        if *keep.last()? != last {
            return None;
        }
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let (t, xi, eta) = (pick(&self.t), pick(&self.xi), pick(&self.eta));
        let mut z = vec![0.0; t.len()];
        for k in 1..t.len() {
            z[k] = z[k - 1] + (-xi[k - 1]).exp() * (eta[k] - eta[k - 1]);
        }
        let runmin_z = running_min(&z);
        Some(PathBundle {
            grid: SimGrid { h: self.grid.h * factor as f64, ..self.grid.clone() },
            scheme: IntegrationScheme::LeftPoint,
            t,
            xi,
            eta,
            z,
            runmin_z,
            provenance: self.provenance,
            underflow: self.underflow,
        })
    }
}

fn running_min(z: &[f64]) -> Vec<f64> {
    let mut m = f64::INFINITY;
    z.iter()
        .map(|&v| {
            m = m.min(v);
            m
        })
        .collect()
}

/// Simulate one path on the hybrid grid of `grid`.
pub fn simulate_path<R: Rng>(
    model: &Model,
    grid: GridSpec,
    scheme: IntegrationScheme,
    rng: R,
) -> PathBundle {
    let n_mesh = grid.mesh_len();
    let mut st = Stepper::new(model, scheme, rng);
    let cap = n_mesh + 1 + (model.jump_intensity() * grid.horizon * 1.5) as usize;
    let (mut t, mut xi, mut eta, mut z) =
        (Vec::with_capacity(cap), Vec::with_capacity(cap), Vec::with_capacity(cap), Vec::with_capacity(cap));
    let mut jump_times = Vec::new();
    t.push(0.0);
    xi.push(0.0);
    eta.push(0.0);
    z.push(0.0);
    for k in 1..=n_mesh {
        let target = grid.mesh_point(k);
        loop {
            let out = st.advance(target);
            if out.jumped {
                jump_times.push(st.t);
            }
            // A jump landing exactly on a mesh point leaves a single grid
            // entry at that time.
            if st.t == *t.last().unwrap() {
                let i = t.len() - 1;
                xi[i] = st.xi;
                eta[i] = st.eta;
                z[i] = st.z;
            } else {
                t.push(st.t);
                xi.push(st.xi);
                eta.push(st.eta);
                z.push(st.z);
            }
            if st.t >= target {
                break;
            }
        }
    }
    let runmin_z = running_min(&z);
    PathBundle {
        grid: SimGrid { horizon: grid.horizon, h: grid.h, jump_times },
        scheme,
        t,
        xi,
        eta,
        z,
        runmin_z,
        provenance: None,
        underflow: st.underflow,
    }
}

/// Path `id` of run `seed`, with the model's default integration scheme.
pub fn simulate_seeded_path(model: &Model, grid: GridSpec, seed: u64, id: u64) -> PathBundle {
    let rng = rng::stream(seed, Purpose::Path, id);
    let mut p = simulate_path(model, grid, IntegrationScheme::default_for(model), rng);
    p.provenance = Some((seed, id));
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RuinTime {
    At(f64),
    Censored(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GouPath {
    pub v: Vec<f64>,
    pub ruin_time: RuinTime,
}

/// `V_t = e^{ξ_t}(v0 + Z_t)` on the grid and the first grid time with
/// `V < 0`.
pub fn gou_path(path: &PathBundle, v0: f64) -> Result<GouPath, PathError> {
    if !(v0 >= 0.0) {
        return Err(PathError::NegativeInitialValue { v0 });
    }
    let v: Vec<f64> = path.xi.iter().zip(&path.z).map(|(x, z)| x.exp() * (v0 + z)).collect();
    let ruin_time = match v.iter().position(|&x| x < 0.0) {
        Some(k) => RuinTime::At(path.t[k]),
        None => RuinTime::Censored(path.grid.horizon),
    };
    Ok(GouPath { v, ruin_time })
}

/// First grid time with `Z < -v0`.
pub fn ruin_time_from_z(path: &PathBundle, v0: f64) -> RuinTime {
    match path.z.iter().position(|&z| z < -v0) {
        Some(k) => RuinTime::At(path.t[k]),
        None => RuinTime::Censored(path.grid.horizon),
    }
}

/// Per-unit-interval quantities of a path, indexed `n = 1..=N` at position
/// `n - 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteEmbedding {
    /// `e^{ξ_n - ξ_{n-1}}`.
    pub a: Vec<f64>,
    /// `e^{ξ_n} ∫_{(n-1,n]} e^{-ξ_{s-}} dη_s`.
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// `e^{ξ_{n-1}} ∫_{(n-1,n]} e^{-ξ_{s-}} dη_s`.
    pub d: Vec<f64>,
    pub m: Vec<f64>,
    pub q: Vec<f64>,
    /// Overshoot of the running supremum of the partial integral.
    pub l: Vec<f64>,
    /// Reflected-at-infimum counterpart of `l` (nonpositive).
    pub lbar: Vec<f64>,
    /// Upward sequence built from `(M, Q, L)`.
    pub x: Vec<f64>,
    /// Ruin-direction sequence built from `(M, -Q, -L̄)`.
    pub x_hat: Vec<f64>,
    /// `e^{ξ_n}` and `Z_n`, kept for reconstructions.
    pub exp_xi: Vec<f64>,
    pub z: Vec<f64>,
}

/// Unit-interval embedding of a path with integer horizon.
pub fn discrete_embedding(path: &PathBundle) -> Result<DiscreteEmbedding, PathError> {
    let (horizon, h) = (path.grid.horizon, path.grid.h);
    let err = PathError::NonIntegerHorizon { horizon, h };
    if horizon.fract() != 0.0 {
        return Err(err);
    }
    let units = horizon as usize;
    let mut idx = Vec::with_capacity(units + 1);
    for n in 0..=units {
        idx.push(path.index_of(n as f64).ok_or_else(|| err.clone())?);
    }
    let mut e = DiscreteEmbedding::default();
    let (mut prod_before, mut sum, mut sum_hat) = (1.0, 0.0, 0.0);
    for n in 1..=units {
        let (i0, i1) = (idx[n - 1], idx[n]);
        let z0 = path.z[i0];
        let inc = path.z[i1] - z0;
        let (mut sup_p, mut inf_p) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in (i0 + 1)..=i1 {
            let p = path.z[k] - z0;
            sup_p = sup_p.max(p);
            inf_p = inf_p.min(p);
        }
        let (xi0, xi1) = (path.xi[i0], path.xi[i1]);
        let a = (xi1 - xi0).exp();
        let (e0, e1) = (xi0.exp(), xi1.exp());
        let m = 1.0 / a;
        let q = e0 * inc;
        let l = e1 * (sup_p - inc);
        let lbar = -e1 * (inc - inf_p);
        e.a.push(a);
        e.b.push(e1 * inc);
        e.c.push(a);
        e.d.push(q);
        e.m.push(m);
        e.q.push(q);
        e.l.push(l);
        e.lbar.push(lbar);
        e.exp_xi.push(e1);
        e.z.push(path.z[i1]);
        sum += prod_before * q;
        sum_hat += prod_before * -q;
        let prod_through = prod_before * m;
        e.x.push(sum + prod_through * l);
        e.x_hat.push(sum_hat + prod_through * -lbar);
        prod_before = prod_through;
    }
    Ok(e)
}

impl DiscreteEmbedding {
    pub fn units(&self) -> usize {
        self.a.len()
    }

    /// `Z_n = Σ_{i ≤ n} Π_{j < i} C_j^{-1} D_i`.
    pub fn reconstruct_z(&self) -> Vec<f64> {
        let mut prod = 1.0;
        let mut sum = 0.0;
        self.c
            .iter()
            .zip(&self.d)
            .map(|(c, d)| {
                sum += prod * d;
                prod /= c;
                sum
            })
            .collect()
    }

    /// `V_n = V_0 Π_{j ≤ n} A_j + Σ_{i ≤ n} Π_{i < j ≤ n} A_j B_i`, evaluated
    /// term by term.
    pub fn reconstruct_v(&self, v0: f64) -> Vec<f64> {
        (1..=self.units())
            .map(|n| {
                let mut acc = v0 * self.a[..n].iter().product::<f64>();
                for i in 1..=n {
                    acc += self.a[i..n].iter().product::<f64>() * self.b[i - 1];
                }
                acc
            })
            .collect()
    }
}

/// KS comparison of one component between two unit indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsComparison {
    pub component: &'static str,
    pub unit_a: usize,
    pub unit_b: usize,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagCorrelation {
    pub component: &'static str,
    pub r: f64,
    pub pairs: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IidReport {
    pub ks: Vec<KsComparison>,
    pub lag1: Vec<LagCorrelation>,
    /// Per-test level after Bonferroni correction of the 1% family level.
    pub ks_level: f64,
    pub passed: bool,
}

/// Check that `(M_n, Q_n, L̄_n)` look iid across `n`.
///
/// `samples[p][n]` is unit `n + 1` of path `p`. Unit 1 is compared against
/// every later unit by two-sample KS per component, and lag-1 correlations
/// are pooled over paths.
pub fn iid_diagnostics(samples: &[Vec<(f64, f64, f64)>]) -> Result<IidReport, PathError> {
    const NEED: usize = 1000;
    let units = samples.iter().map(Vec::len).min().unwrap_or(0);
    let got = samples.len() * units;
    if got < NEED || units < 2 || samples.len() < 2 {
        return Err(PathError::InsufficientSamples { got, need: NEED });
    }
    type Pick = fn(&(f64, f64, f64)) -> f64;
    let comps: [(&'static str, Pick); 3] =
        [("M", |s| s.0), ("Q", |s| s.1), ("Lbar", |s| s.2)];
    let ks_level = 0.01 / (comps.len() * (units - 1)) as f64;
    let mut ks = Vec::new();
    let mut lag1 = Vec::new();
    let mut passed = true;
    for (name, pick) in comps {
        let column = |n: usize| samples.iter().map(|s| pick(&s[n])).collect::<Vec<_>>();
        // Point masses (up to rounding in the embedding) are trivially i.i.d.
        let (lo, hi) = samples
            .iter()
            .flat_map(|s| s[..units].iter().map(pick))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi - lo <= 1e-9 * lo.abs().max(hi.abs()) {
            for n in 1..units {
                ks.push(KsComparison { component: name, unit_a: 1, unit_b: n + 1, statistic: 0.0, p_value: 1.0 });
            }
            let pairs = samples.len() * (units - 1);
            lag1.push(LagCorrelation { component: name, r: 0.0, pairs, bound: 4.0 / (pairs as f64).sqrt() });
            continue;
        }
        let first = column(0);
        for n in 1..units {
            let r = stats::ks_two_sample(&first, &column(n));
            passed &= r.p_value >= ks_level;
            ks.push(KsComparison {
                component: name,
                unit_a: 1,
                unit_b: n + 1,
                statistic: r.statistic,
                p_value: r.p_value,
            });
        }
        let series: Vec<Vec<f64>> =
            samples.iter().map(|s| s[..units].iter().map(pick).collect()).collect();
        let (r, pairs) = stats::pooled_lag1_autocorrelation(&series);
        // A constant component carries no serial dependence.
        let r = if r.is_finite() { r } else { 0.0 };
        let bound = 4.0 / (pairs as f64).sqrt();
        passed &= r.abs() <= bound;
        lag1.push(LagCorrelation { component: name, r, pairs, bound });
    }
    Ok(IidReport { ks, lag1, ks_level, passed })
}

/// `(M_n, Q_n, L̄_n)` for `n = 1..=units` along path `id`, drawn from its
/// own stream.
pub fn unit_samples(model: &Model, units: usize, h: f64, seed: u64, id: u64) -> Vec<(f64, f64, f64)> {
    let grid = GridSpec { horizon: units as f64, h };
    let rng: Stream = rng::stream(seed, Purpose::UnitInterval, id);
    let path = simulate_path(model, grid, IntegrationScheme::default_for(model), rng);
    let e = discrete_embedding(&path).expect("integer horizon");
    (0..units).map(|n| (e.m[n], e.q[n], e.lbar[n])).collect()
}
