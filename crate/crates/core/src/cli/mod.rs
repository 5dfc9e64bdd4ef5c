//! Command-line front end.
//!
//! `gou-ruin <analyze|simulate|ruin|ldp|constant|verify> --config <path>
//! [--force] [--out <dir>]`
//!
//! Exit codes: 0 success, 1 configuration error, 2 condition gate,
//! 3 numerical failure (including failed `verify` checks).

pub mod config;
pub mod manifest;
pub mod plots;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::cramer::{self, ConditionReport, CramerProfile};
use crate::levy::{ExponentDomain, Model, ModelError, ModelSpec};
use crate::paths::{self, GridSpec};
use crate::ruin::{self, ConstantConfig, CramerFit, RuinConfig, RuinCurve, RuinError};
use config::{ConfigError, RunConfig};
use manifest::Outputs;
use plots::{line_chart, Series};

#[derive(Debug, Parser)]
#[command(name = "gou-ruin", version, about = "Ruin asymptotics for generalised Ornstein-Uhlenbeck processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
enum Command {
    /// Cramér profile, condition report and rate function.
    Analyze(Args),
    /// Dump simulated paths of (xi, eta, Z).
    Simulate(Args),
    /// Ruin probabilities over the z grid.
    Ruin(Args),
    /// Ruin-time distribution at ldp_z over the x grid.
    Ldp(Args),
    /// Monte Carlo estimate of the Cramér constant.
    Constant(Args),
    /// Ruin curve, constant and fit checked against the verify thresholds.
    Verify(Args),
}

#[derive(Debug, Clone, PartialEq, Eq, clap::Args)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Proceed past failed or unverified condition checks.
    #[arg(long)]
    force: bool,
    /// Output directory (overrides [output] dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Simulate(_) => "simulate",
            Command::Ruin(_) => "ruin",
            Command::Ldp(_) => "ldp",
            Command::Constant(_) => "constant",
            Command::Verify(_) => "verify",
        }
    }

    fn args(&self) -> &Args {
        match self {
            Command::Analyze(a)
            | Command::Simulate(a)
            | Command::Ruin(a)
            | Command::Ldp(a)
            | Command::Constant(a)
            | Command::Verify(a) => a,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Gate(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Gate(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Gate(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Model(ModelError::ConditionAViolation { .. }) => Failure::Gate(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<RuinError> for Failure {
    fn from(e: RuinError) -> Self {
        match e {
            RuinError::ConditionGate(_) => Failure::Gate(e.to_string()),
            RuinError::InsufficientRuins { .. } | RuinError::Cramer(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o error: {e}"))
    }
}

impl From<plots::PlotError> for Failure {
    fn from(e: plots::PlotError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    model: Model,
    digest: String,
    profile: Result<CramerProfile, cramer::CramerError>,
    report: ConditionReport,
}

impl Ctx {
    fn ruin_config(&self) -> RuinConfig {
        let s = &self.cfg.simulation;
        RuinConfig {
            n_paths: s.n_paths,
            seed: s.seed,
            h: s.h,
            theta: s.theta,
            t_max: s.t_max,
            workers: s.workers,
            force: self.cfg.force,
        }
    }

    fn constant_config(&self) -> ConstantConfig {
        ConstantConfig {
            blocks: self.cfg.simulation.mom_blocks,
            ..ConstantConfig::from_ruin(&self.ruin_config(), self.cfg.simulation.constant_samples)
        }
    }

    fn profile(&self) -> Result<&CramerProfile, Failure> {
        self.profile.as_ref().map_err(|e| Failure::Numerical(e.to_string()))
    }

    fn conditions(&self) -> String {
        let v = |c: &cramer::ConditionVerdict| format!("{:?}", c.verdict);
        format!("A={} B={} C={}", v(&self.report.cond_a), v(&self.report.cond_b), v(&self.report.cond_c))
    }
}

fn execute(cmd: Command) -> Result<i32, Failure> {
    let args = cmd.args();
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = config::parse_config_with(&text, args.force)?;
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    let model = cfg.build_model().map_err(|e| Failure::from(ConfigError::Model(e)))?;
    let profile = cramer::lundberg_and_profile(&model);
    let report = cramer::check_conditions(&model, profile.as_ref().ok());
    let ctx = Ctx { digest: manifest::sha256_hex(text.as_bytes()), cfg, model, profile, report };

    let started = manifest::unix_now();
    let mut out = Outputs::new(&ctx.cfg.output.dir)?;
    let result = match &cmd {
        Command::Analyze(_) => analyze(&ctx, &mut out),
        Command::Simulate(_) => simulate(&ctx, &mut out),
        Command::Ruin(_) => ruin_cmd(&ctx, &mut out),
        Command::Ldp(_) => ldp(&ctx, &mut out),
        Command::Constant(_) => constant(&ctx, &mut out),
        Command::Verify(_) => verify(&ctx, &mut out),
    };
    let code = match &result {
        Ok(c) => *c,
        Err(f) => f.exit_code(),
    };
    for f in &out.files {
        println!("wrote {}", ctx.cfg.output.dir.join(&f.path).display());
    }
    out.finish(cmd.name(), &ctx.digest, ctx.cfg.simulation.seed, Some(ctx.conditions()), started, code)?;
    result
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

#[derive(Serialize)]
struct ProfileFile<'a> {
    model: &'a ModelSpec,
    validated: bool,
    domain: ExponentDomain,
    profile: Option<&'a CramerProfile>,
    profile_error: Option<String>,
    /// `1/μ*`.
    flat_from: Option<f64>,
    conditions: &'a ConditionReport,
}

fn rate_table(ctx: &Ctx, p: &CramerProfile) -> Vec<(f64, f64)> {
    let n = ctx.cfg.analysis.rate_points;
    let end = 2.0 * p.flat_from();
    (1..=n)
        .map(|i| p.x0 + (end - p.x0) * i as f64 / n as f64)
        .map(|x| (x, cramer::rate_function(p, &ctx.model, x).unwrap_or(f64::NAN)))
        .collect()
}

fn analyze(ctx: &Ctx, out: &mut Outputs) -> Result<i32, Failure> {
    let profile = ctx.profile.as_ref().ok();
    out.write(
        "profile.json",
        &json(&ProfileFile {
            model: ctx.model.spec(),
            validated: ctx.model.is_checked(),
            domain: ctx.model.domain(),
            profile,
            profile_error: ctx.profile.as_ref().err().map(|e| e.to_string()),
            flat_from: profile.map(CramerProfile::flat_from),
            conditions: &ctx.report,
        }),
    )?;
    let p = ctx.profile()?;
    let table = rate_table(ctx, p);
    let mut csv = String::from("x,rate\n");
    for (x, r) in &table {
        let _ = writeln!(csv, "{x},{r}");
    }
    out.write("rate_function.csv", csv.as_bytes())?;
    if let Some(alphas) = &ctx.cfg.analysis.alpha_grid {
        let checks = ruin::empirical_laplace_check(
            &ctx.model,
            alphas,
            ctx.cfg.simulation.laplace_samples as usize,
            ctx.cfg.simulation.seed,
        )?;
        let mut csv = String::from("alpha,exact,estimate,std_error,z_score,unstable\n");
        for c in &checks {
            let _ = writeln!(csv, "{},{},{},{},{},{}", c.alpha, c.exact, c.estimate, c.std_error, c.z_score, c.unstable);
        }
        out.write("laplace_check.csv", csv.as_bytes())?;
    }
    if ctx.cfg.output.plots {
        let flat = vec![(p.x0, p.w), (table.last().unwrap().0, p.w)];
        let svg = line_chart(
            "Finite-time rate function",
            "x",
            "R(x)",
            &[
                Series { name: "R(x)", points: table, color: "#1f77b4", dashed: false, markers: false },
                Series { name: "w", points: flat, color: "#d62728", dashed: true, markers: false },
            ],
        )?;
        out.write("rate_function.svg", svg.as_bytes())?;
    }
    Ok(0)
}

fn simulate(ctx: &Ctx, out: &mut Outputs) -> Result<i32, Failure> {
    let s = &ctx.cfg.simulation;
    let grid = GridSpec::new(s.horizon, s.h).map_err(|e| Failure::Config(e.to_string()))?;
    let bundles: Vec<_> = (0..s.n_dump).map(|id| paths::simulate_seeded_path(&ctx.model, grid, s.seed, id)).collect();
    if ctx.cfg.output.dump_paths {
        let mut csv = String::from("path,t,xi,eta,z,runmin_z");
        if s.v0.is_some() {
            csv.push_str(",v");
        }
        csv.push('\n');
        for (id, b) in bundles.iter().enumerate() {
            let v = s.v0.map(|v0| paths::gou_path(b, v0).expect("v0 validated").v);
            for k in 0..b.len() {
                let _ = write!(csv, "{id},{},{},{},{},{}", b.t[k], b.xi[k], b.eta[k], b.z[k], b.runmin_z[k]);
                if let Some(v) = &v {
                    let _ = write!(csv, ",{}", v[k]);
                }
                csv.push('\n');
            }
        }
        out.write("paths.csv", csv.as_bytes())?;
    }
    let mut csv = String::from("path,t_end,xi_end,eta_end,z_end,min_z,jumps,underflow,ruin_time\n");
    for (id, b) in bundles.iter().enumerate() {
        let k = b.len() - 1;
        let ruin = match s.v0.map(|v0| paths::ruin_time_from_z(b, v0)) {
            Some(paths::RuinTime::At(t)) => t.to_string(),
            Some(paths::RuinTime::Censored(_)) => "censored".into(),
            None => String::new(),
        };
        let _ = writeln!(
            csv,
            "{id},{},{},{},{},{},{},{},{ruin}",
            b.t[k],
            b.xi[k],
            b.eta[k],
            b.z[k],
            b.runmin_z[k],
            b.grid.jump_times.len(),
            b.underflow
        );
    }
    out.write("paths_summary.csv", csv.as_bytes())?;
    if ctx.cfg.output.plots && !bundles.is_empty() {
        const COLORS: [&str; 5] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];
        let names: Vec<String> = (0..bundles.len().min(5)).map(|i| format!("path {i}")).collect();
        let series: Vec<Series> = bundles
            .iter()
            .take(5)
            .enumerate()
            .map(|(i, b)| Series {
                name: &names[i],
                points: b.t.iter().copied().zip(b.z.iter().copied()).collect(),
                color: COLORS[i],
                dashed: false,
                markers: false,
            })
            .collect();
        out.write("paths.svg", line_chart("Integral process Z", "t", "Z_t", &series)?.as_bytes())?;
    }
    Ok(0)
}

fn ruin_plots(out: &mut Outputs, curve: &RuinCurve, fit: Option<&CramerFit>, w: Option<f64>) -> Result<(), Failure> {
    let pts: Vec<(f64, f64)> =
        curve.points.iter().filter(|p| p.psi_hat > 0.0).map(|p| (p.z.ln(), p.psi_hat.ln())).collect();
    if pts.is_empty() {
        eprintln!("note: no ruined paths, ruin plots skipped");
        return Ok(());
    }
    let mut series = vec![Series { name: "ln psi_hat", points: pts.clone(), color: "#1f77b4", dashed: false, markers: true }];
    let (lo, hi) = (pts.first().unwrap().0, pts.last().unwrap().0);
    if let Some(f) = fit {
        series.push(Series {
            name: "fitted slope",
            points: vec![(lo, f.intercept + f.slope * lo), (hi, f.intercept + f.slope * hi)],
            color: "#ff7f0e",
            dashed: false,
            markers: false,
        });
        series.push(Series {
            name: "reference slope -w",
            points: vec![(lo, f.intercept - f.w * lo), (hi, f.intercept - f.w * hi)],
            color: "#d62728",
            dashed: true,
            markers: false,
        });
    }
    out.write("ruin_curve.svg", line_chart("Ruin probability", "ln z", "ln psi", &series)?.as_bytes())?;
    if let Some(w) = w {
        let pts = curve.points.iter().map(|p| (p.z, p.z.powf(w) * p.psi_hat)).collect();
        let svg = line_chart(
            "Plateau z^w psi(z)",
            "z",
            "z^w psi_hat",
            &[Series { name: "z^w psi_hat", points: pts, color: "#2ca02c", dashed: false, markers: true }],
        )?;
        out.write("plateau.svg", svg.as_bytes())?;
    }
    Ok(())
}

fn ruin_cmd(ctx: &Ctx, out: &mut Outputs) -> Result<i32, Failure> {
    let curve = ruin::estimate_ruin_curve(&ctx.model, &ctx.cfg.analysis.z_grid, &ctx.ruin_config())?;
    out.write("ruin_curve.csv", curve.to_csv().as_bytes())?;
    let fit = match ctx.profile.as_ref() {
        Ok(p) => match ruin::fit_cramer_asymptotics(&curve, p.w) {
            Ok(mut f) => {
                f.mu_star = Some(p.mu_star);
                out.write("cramer_fit.json", &json(&f))?;
                Some(f)
            }
            Err(e) => {
                eprintln!("note: no power-law fit: {e}");
                None
            }
        },
        Err(e) => {
            eprintln!("note: no power-law fit: {e}");
            None
        }
    };
    if ctx.cfg.output.plots {
        ruin_plots(out, &curve, fit.as_ref(), ctx.profile.as_ref().ok().map(|p| p.w))?;
    }
    Ok(0)
}

fn ldp(ctx: &Ctx, out: &mut Outputs) -> Result<i32, Failure> {
    let a = &ctx.cfg.analysis;
    let cdf = ruin::estimate_ruin_time_cdf(&ctx.model, a.ldp_z, &a.x_grid, &ctx.ruin_config())?;
    let rates: Vec<f64> = cdf
        .points
        .iter()
        .map(|q| match &ctx.profile {
            Ok(p) => cramer::rate_function(p, &ctx.model, q.x).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        })
        .collect();
    let mut csv = String::from(ruin::RuinTimeCdf::CSV_HEADER);
    csv.push_str(",rate\n");
    for (line, r) in cdf.to_csv().lines().skip(1).zip(&rates) {
        let _ = writeln!(csv, "{line},{r}");
    }
    out.write("ldp.csv", csv.as_bytes())?;
    if ctx.cfg.output.plots {
        let est = cdf.points.iter().map(|q| (q.x, -q.normalized_log)).collect();
        let exact = cdf.points.iter().zip(&rates).map(|(q, &r)| (q.x, r)).collect();
        let svg = line_chart(
            &format!("Ruin-time exponent at z = {}", a.ldp_z),
            "x",
            "-ln P(T_z <= x ln z) / ln z",
            &[
                Series { name: "estimate", points: est, color: "#1f77b4", dashed: false, markers: true },
                Series { name: "R(x)", points: exact, color: "#d62728", dashed: true, markers: false },
            ],
        )?;
        out.write("ldp.svg", svg.as_bytes())?;
    }
    Ok(0)
}

fn constant(ctx: &Ctx, out: &mut Outputs) -> Result<i32, Failure> {
    let p = ctx.profile()?;
    let c = ruin::estimate_cramer_constant(&ctx.model, p, &ctx.constant_config())?;
    out.write("constant.json", &json(&c))?;
    if c.non_finite_moment {
        eprintln!("warning: block means disperse; the moment behind the constant may be infinite");
    }
    Ok(0)
}

/// One line of the verify report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Evaluate a fit (with its constant) against the verify thresholds.
pub fn verify_checks(fit: &CramerFit, v: &config::VerifySection) -> Vec<Check> {
    let w = fit.w;
    let mut checks = vec![
        Check {
            name: "slope_within_tolerance",
            passed: (fit.slope + w).abs() <= v.slope_rel_tol * w,
            detail: format!("slope {:.4} vs -w = {:.4} (tolerance {:.0}%)", fit.slope, -w, 100.0 * v.slope_rel_tol),
        },
        Check {
            name: "slope_interval_covers",
            passed: (fit.slope + w).abs() <= crate::stats::Z95 * fit.slope_se,
            detail: format!(
                "95% interval [{:.4}, {:.4}]",
                fit.slope - crate::stats::Z95 * fit.slope_se,
                fit.slope + crate::stats::Z95 * fit.slope_se
            ),
        },
    ];
    let top = &fit.plateau[fit.plateau.len().saturating_sub(v.plateau_top)..];
    let vals: Vec<f64> = top.iter().map(|p| p.value).collect();
    let ratio = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) / vals.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "plateau_ratio",
        passed: ratio <= v.plateau_ratio_max,
        detail: format!("max/min of z^w psi_hat over top {} = {:.4} (limit {})", top.len(), ratio, v.plateau_ratio_max),
    });
    let (pm, plo, phi) = fit.plateau_top(v.plateau_top);
    match &fit.constant {
        Some(c) => {
            let factor = (c.estimate / pm).max(pm / c.estimate);
            checks.push(Check {
                name: "constant_vs_plateau",
                passed: c.estimate > 0.0 && factor <= v.constant_factor,
                detail: format!("C = {:.5} vs plateau mean {:.5} (factor {:.3}, limit {})", c.estimate, pm, factor, v.constant_factor),
            });
            checks.push(Check {
                name: "intervals_overlap",
                passed: c.ci_lo <= phi && plo <= c.ci_hi,
                detail: format!("C in [{:.5}, {:.5}], plateau in [{:.5}, {:.5}]", c.ci_lo, c.ci_hi, plo, phi),
            });
        }
        None => checks.push(Check { name: "constant_vs_plateau", passed: false, detail: "no constant estimate".into() }),
    }
    checks
}

fn verify(ctx: &Ctx, out: &mut Outputs) -> Result<i32, Failure> {
    let p = ctx.profile()?;
    let curve = ruin::estimate_ruin_curve(&ctx.model, &ctx.cfg.analysis.z_grid, &ctx.ruin_config())?;
    out.write("ruin_curve.csv", curve.to_csv().as_bytes())?;
    let mut fit = ruin::fit_cramer_asymptotics(&curve, p.w)?;
    fit.mu_star = Some(p.mu_star);
    let c = ruin::estimate_cramer_constant(&ctx.model, p, &ctx.constant_config())?;
    out.write("constant.json", &json(&c))?;
    fit.constant = Some(c);
    out.write("cramer_fit.json", &json(&fit))?;
    let checks = verify_checks(&fit, &ctx.cfg.verify);
    let mut report = format!("w = {}\nmu_star = {}\nconditions: {}\n", p.w, p.mu_star, ctx.conditions());
    for c in &checks {
        let _ = writeln!(report, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let all = checks.iter().all(|c| c.passed);
    let _ = writeln!(report, "overall: {}", if all { "PASS" } else { "FAIL" });
    out.write("verify_report.txt", report.as_bytes())?;
    print!("{report}");
    if ctx.cfg.output.plots {
        ruin_plots(out, &curve, Some(&fit), Some(p.w))?;
    }
    Ok(if all { 0 } else { 3 })
}
