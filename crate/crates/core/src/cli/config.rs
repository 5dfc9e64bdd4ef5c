//! Run configuration: a sectioned TOML file.
//!
//! ```toml
//! [model]
//! kind = "brownian_drift"
//! gamma_xi = 1.0
//! gamma_eta = -0.1
//! var_xi = 2.0
//! cov_xi_eta = 0.0
//! var_eta = 0.01
//!
//! [simulation]
//! seed = 42
//! n_paths = 100000
//! ```
//!
//! Every key outside the documented set is rejected, and the seed is
//! mandatory.

use std::path::PathBuf;

use thiserror::Error;
use toml::{Table, Value};

use crate::levy::{
    validate, BrownianDriftParams, CpGaussianParams, JumpDiffusionParams, JumpLaw, Model, ModelError,
    ModelSpec, VarianceGammaParams,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{key}` in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("missing key `{key}` in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("[simulation] seed is required")]
    MissingSeed,
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSection {
    pub seed: u64,
    pub n_paths: u64,
    pub h: f64,
    pub horizon: f64,
    pub theta: f64,
    pub t_max: f64,
    pub workers: usize,
    pub constant_samples: u64,
    pub mom_blocks: usize,
    pub n_dump: u64,
    pub v0: Option<f64>,
    pub laplace_samples: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSection {
    pub z_grid: Vec<f64>,
    pub alpha_grid: Option<Vec<f64>>,
    pub x_grid: Vec<f64>,
    pub ldp_z: f64,
    pub rate_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub dump_paths: bool,
    pub plots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySection {
    pub slope_rel_tol: f64,
    pub plateau_ratio_max: f64,
    pub constant_factor: f64,
    pub plateau_top: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { slope_rel_tol: 0.2, plateau_ratio_max: 1.5, constant_factor: 2.0, plateau_top: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// Admit the model without family validation (degenerate test models).
    pub unchecked: bool,
    pub simulation: SimulationSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
    pub verify: VerifySection,
    /// Proceed past failed or unverified condition checks.
    pub force: bool,
}

impl RunConfig {
    /// The validated model, honouring `unchecked` and `force`.
    pub fn build_model(&self) -> Result<Model, ModelError> {
        if self.unchecked {
            return Model::unchecked(self.model);
        }
        match validate(self.model) {
            Err(ModelError::ConditionAViolation { .. }) if self.force => Model::unchecked(self.model),
            other => other,
        }
    }
}

const SECTIONS: &[&str] = &["model", "simulation", "analysis", "output", "verify", "override"];

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str, allowed: &[&str]) -> Result<Self, ConfigError> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                return Err(ConfigError::InvalidValue { key: name.into(), reason: "expected a section".into() })
            }
        };
        if let Some(t) = table {
            if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(ConfigError::UnknownKey { section: name.into(), key: k.clone() });
            }
        }
        Ok(Section { name, table })
    }

    fn key(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn invalid(&self, key: &str, reason: &str) -> ConfigError {
        ConfigError::InvalidValue { key: self.key(key), reason: reason.into() }
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.invalid(key, "expected a number")),
        }
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.opt_f64(key)?
            .ok_or_else(|| ConfigError::MissingKey { section: self.name.into(), key: key.into() })
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    fn opt_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(self.invalid(key, "expected a nonnegative integer")),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        Ok(self.opt_u64(key)?.unwrap_or(default))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(self.invalid(key, "expected true or false")),
        }
    }

    fn opt_str(&self, key: &str) -> Result<Option<&'a str>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.invalid(key, "expected a string")),
        }
    }

    fn opt_grid(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let Value::Array(items) = v else { return Err(self.invalid(key, "expected an array of numbers")) };
        let grid = items
            .iter()
            .map(|x| match x {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                _ => Err(self.invalid(key, "expected an array of numbers")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if grid.is_empty() || !grid.iter().all(|x| x.is_finite()) || !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(self.invalid(key, "grid must be nonempty, finite and strictly increasing"));
        }
        Ok(Some(grid))
    }
}

fn model_section(root: &Table) -> Result<(ModelSpec, bool), ConfigError> {
    let kind = match root.get("model").and_then(|m| m.get("kind")) {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(ConfigError::InvalidValue { key: "model.kind".into(), reason: "expected a string".into() }),
        None => return Err(ConfigError::MissingKey { section: "model".into(), key: "kind".into() }),
    };
    let keys: &[&str] = match kind.as_str() {
        "cp_gaussian" => &["kind", "unchecked", "gamma_xi", "gamma_eta", "lambda", "mean_x", "mean_y", "var_x", "cov_xy", "var_y"],
        "brownian_drift" => &["kind", "unchecked", "gamma_xi", "gamma_eta", "var_xi", "cov_xi_eta", "var_eta"],
        "jump_diffusion" => &["kind", "unchecked", "gamma_xi", "gamma_eta", "sigma2", "lambda", "jump", "jump_mean", "jump_var", "rho"],
        "variance_gamma" => &["kind", "unchecked", "gamma_xi", "gamma_eta", "mu", "shape", "rate"],
        other => {
            return Err(ConfigError::InvalidValue {
                key: "model.kind".into(),
                reason: format!("unknown model `{other}`"),
            })
        }
    };
    let s = Section::new(root, "model", keys)?;
    let spec = match kind.as_str() {
        "cp_gaussian" => ModelSpec::CpGaussian(CpGaussianParams {
            gamma_xi: s.f64("gamma_xi")?,
            gamma_eta: s.f64("gamma_eta")?,
            lambda: s.f64("lambda")?,
            mean_x: s.f64("mean_x")?,
            mean_y: s.f64("mean_y")?,
            var_x: s.f64("var_x")?,
            cov_xy: s.f64("cov_xy")?,
            var_y: s.f64("var_y")?,
        }),
        "brownian_drift" => ModelSpec::BrownianDrift(BrownianDriftParams {
            gamma_xi: s.f64("gamma_xi")?,
            gamma_eta: s.f64("gamma_eta")?,
            var_xi: s.f64("var_xi")?,
            cov_xi_eta: s.f64("cov_xi_eta")?,
            var_eta: s.f64("var_eta")?,
        }),
        "jump_diffusion" => {
            let jump = match s.opt_str("jump")? {
                Some("gaussian") => {
                    if s.get("rho").is_some() {
                        return Err(ConfigError::UnknownKey { section: "model".into(), key: "rho".into() });
                    }
                    JumpLaw::Gaussian { mean: s.f64("jump_mean")?, var: s.f64("jump_var")? }
                }
                Some("laplace") => {
                    if let Some(k) = ["jump_mean", "jump_var"].into_iter().find(|k| s.get(k).is_some()) {
                        return Err(ConfigError::UnknownKey { section: "model".into(), key: k.into() });
                    }
                    JumpLaw::Laplace { rho: s.f64("rho")? }
                }
                Some(other) => return Err(s.invalid("jump", &format!("unknown jump law `{other}`"))),
                None => return Err(ConfigError::MissingKey { section: "model".into(), key: "jump".into() }),
            };
            ModelSpec::JumpDiffusion(JumpDiffusionParams {
                gamma_xi: s.f64("gamma_xi")?,
                gamma_eta: s.f64("gamma_eta")?,
                sigma2: s.f64("sigma2")?,
                lambda: s.f64("lambda")?,
                jump,
            })
        }
        _ => ModelSpec::VarianceGamma(VarianceGammaParams {
            gamma_xi: s.f64("gamma_xi")?,
            gamma_eta: s.f64("gamma_eta")?,
            mu: s.f64("mu")?,
            shape: s.f64("shape")?,
            rate: s.f64("rate")?,
        }),
    };
    Ok((spec, s.bool_or("unchecked", false)?))
}

fn positive(s: &Section, key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(s.invalid(key, "must be positive and finite"))
    }
}

/// Parse and validate a configuration; `force` adds to the file's own
/// `[override] force`.
pub fn parse_config_with(text: &str, force: bool) -> Result<RunConfig, ConfigError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey { section: "<root>".into(), key: k.clone() });
    }
    let (model, unchecked) = model_section(&root)?;

    let s = Section::new(
        &root,
        "simulation",
        &["seed", "n_paths", "h", "horizon", "theta", "t_max", "workers", "constant_samples", "mom_blocks", "n_dump", "v0", "laplace_samples"],
    )?;
    let seed = s.opt_u64("seed")?.ok_or(ConfigError::MissingSeed)?;
    let h = positive(&s, "h", s.f64_or("h", 1.0 / 256.0)?)?;
    let horizon = positive(&s, "horizon", s.f64_or("horizon", 10.0)?)?;
    if horizon < h {
        return Err(s.invalid("horizon", "must be at least h"));
    }
    let t_max = positive(&s, "t_max", s.f64_or("t_max", 200.0)?)?;
    if t_max < h {
        return Err(s.invalid("t_max", "must be at least h"));
    }
    let v0 = s.opt_f64("v0")?;
    if v0.is_some_and(|v| !(v >= 0.0)) {
        return Err(s.invalid("v0", "must be nonnegative"));
    }
    let simulation = SimulationSection {
        seed,
        n_paths: s.u64_or("n_paths", 100_000)?,
        h,
        horizon,
        theta: positive(&s, "theta", s.f64_or("theta", 30.0)?)?,
        t_max,
        workers: s.u64_or("workers", 0)? as usize,
        constant_samples: s.u64_or("constant_samples", 100_000)?,
        mom_blocks: s.u64_or("mom_blocks", 20)? as usize,
        n_dump: s.u64_or("n_dump", 10)?,
        v0,
        laplace_samples: s.u64_or("laplace_samples", 100_000)?,
    };
    if simulation.n_paths == 0 {
        return Err(s.invalid("n_paths", "must be positive"));
    }
    if simulation.mom_blocks == 0 {
        return Err(s.invalid("mom_blocks", "must be positive"));
    }

    let s = Section::new(&root, "analysis", &["z_grid", "alpha_grid", "x_grid", "ldp_z", "rate_points"])?;
    let analysis = AnalysisSection {
        z_grid: s.opt_grid("z_grid")?.unwrap_or_else(|| vec![5.0, 10.0, 20.0, 40.0, 80.0]),
        alpha_grid: s.opt_grid("alpha_grid")?,
        x_grid: s.opt_grid("x_grid")?.unwrap_or_else(|| vec![0.25, 0.5, 1.0, 2.0, 4.0]),
        ldp_z: s.f64_or("ldp_z", 40.0)?,
        rate_points: s.u64_or("rate_points", 200)? as usize,
    };
    if analysis.z_grid[0] < 0.0 {
        return Err(s.invalid("z_grid", "initial values must be nonnegative"));
    }
    if analysis.x_grid[0] <= 0.0 {
        return Err(s.invalid("x_grid", "must be positive"));
    }
    if analysis.rate_points < 2 {
        return Err(s.invalid("rate_points", "need at least 2"));
    }

    let s = Section::new(&root, "output", &["dir", "dump_paths", "plots"])?;
    let output = OutputSection {
        dir: PathBuf::from(s.opt_str("dir")?.unwrap_or("out")),
        dump_paths: s.bool_or("dump_paths", true)?,
        plots: s.bool_or("plots", true)?,
    };

    let s = Section::new(&root, "verify", &["slope_rel_tol", "plateau_ratio_max", "constant_factor", "plateau_top"])?;
    let d = VerifySection::default();
    let verify = VerifySection {
        slope_rel_tol: positive(&s, "slope_rel_tol", s.f64_or("slope_rel_tol", d.slope_rel_tol)?)?,
        plateau_ratio_max: positive(&s, "plateau_ratio_max", s.f64_or("plateau_ratio_max", d.plateau_ratio_max)?)?,
        constant_factor: positive(&s, "constant_factor", s.f64_or("constant_factor", d.constant_factor)?)?,
        plateau_top: s.u64_or("plateau_top", d.plateau_top as u64)? as usize,
    };

    let s = Section::new(&root, "override", &["force"])?;
    let cfg = RunConfig {
        model,
        unchecked,
        simulation,
        analysis,
        output,
        verify,
        force: s.bool_or("force", false)? || force,
    };
    cfg.build_model()?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, false)
}

fn grid_value(g: &[f64]) -> Value {
    Value::Array(g.iter().map(|&x| Value::Float(x)).collect())
}

/// Render a configuration back to TOML; `parse_config(render_config(c)) == c`.
pub fn render_config(cfg: &RunConfig) -> String {
    let mut model = Table::new();
    model.insert("kind".into(), Value::String(cfg.model.kind().into()));
    let mut put = |k: &str, v: f64| {
        model.insert(k.into(), Value::Float(v));
    };
    match cfg.model {
        ModelSpec::CpGaussian(p) => {
            put("gamma_xi", p.gamma_xi);
            put("gamma_eta", p.gamma_eta);
            put("lambda", p.lambda);
            put("mean_x", p.mean_x);
            put("mean_y", p.mean_y);
            put("var_x", p.var_x);
            put("cov_xy", p.cov_xy);
            put("var_y", p.var_y);
        }
        ModelSpec::BrownianDrift(p) => {
            put("gamma_xi", p.gamma_xi);
            put("gamma_eta", p.gamma_eta);
            put("var_xi", p.var_xi);
            put("cov_xi_eta", p.cov_xi_eta);
            put("var_eta", p.var_eta);
        }
        ModelSpec::JumpDiffusion(p) => {
            put("gamma_xi", p.gamma_xi);
            put("gamma_eta", p.gamma_eta);
            put("sigma2", p.sigma2);
            put("lambda", p.lambda);
            match p.jump {
                JumpLaw::Gaussian { mean, var } => {
                    put("jump_mean", mean);
                    put("jump_var", var);
                    model.insert("jump".into(), Value::String("gaussian".into()));
                }
                JumpLaw::Laplace { rho } => {
                    put("rho", rho);
                    model.insert("jump".into(), Value::String("laplace".into()));
                }
            }
        }
        ModelSpec::VarianceGamma(p) => {
            put("gamma_xi", p.gamma_xi);
            put("gamma_eta", p.gamma_eta);
            put("mu", p.mu);
            put("shape", p.shape);
            put("rate", p.rate);
        }
    }
    if cfg.unchecked {
        model.insert("unchecked".into(), Value::Boolean(true));
    }

    let s = &cfg.simulation;
    let mut sim = Table::new();
    sim.insert("seed".into(), Value::Integer(s.seed as i64));
    sim.insert("n_paths".into(), Value::Integer(s.n_paths as i64));
    sim.insert("h".into(), Value::Float(s.h));
    sim.insert("horizon".into(), Value::Float(s.horizon));
    sim.insert("theta".into(), Value::Float(s.theta));
    sim.insert("t_max".into(), Value::Float(s.t_max));
    sim.insert("workers".into(), Value::Integer(s.workers as i64));
    sim.insert("constant_samples".into(), Value::Integer(s.constant_samples as i64));
    sim.insert("mom_blocks".into(), Value::Integer(s.mom_blocks as i64));
    sim.insert("n_dump".into(), Value::Integer(s.n_dump as i64));
    sim.insert("laplace_samples".into(), Value::Integer(s.laplace_samples as i64));
    if let Some(v0) = s.v0 {
        sim.insert("v0".into(), Value::Float(v0));
    }

    let a = &cfg.analysis;
    let mut analysis = Table::new();
    analysis.insert("z_grid".into(), grid_value(&a.z_grid));
    if let Some(g) = &a.alpha_grid {
        analysis.insert("alpha_grid".into(), grid_value(g));
    }
    analysis.insert("x_grid".into(), grid_value(&a.x_grid));
    analysis.insert("ldp_z".into(), Value::Float(a.ldp_z));
    analysis.insert("rate_points".into(), Value::Integer(a.rate_points as i64));

    let mut output = Table::new();
    output.insert("dir".into(), Value::String(cfg.output.dir.to_string_lossy().into_owned()));
    output.insert("dump_paths".into(), Value::Boolean(cfg.output.dump_paths));
    output.insert("plots".into(), Value::Boolean(cfg.output.plots));

    let v = &cfg.verify;
    let mut verify = Table::new();
    verify.insert("slope_rel_tol".into(), Value::Float(v.slope_rel_tol));
    verify.insert("plateau_ratio_max".into(), Value::Float(v.plateau_ratio_max));
    verify.insert("constant_factor".into(), Value::Float(v.constant_factor));
    verify.insert("plateau_top".into(), Value::Integer(v.plateau_top as i64));

    let mut ov = Table::new();
    ov.insert("force".into(), Value::Boolean(cfg.force));

    let mut root = Table::new();
    root.insert("model".into(), Value::Table(model));
    root.insert("simulation".into(), Value::Table(sim));
    root.insert("analysis".into(), Value::Table(analysis));
    root.insert("output".into(), Value::Table(output));
    root.insert("verify".into(), Value::Table(verify));
    root.insert("override".into(), Value::Table(ov));
    toml::to_string(&root).expect("plain table serializes")
}
