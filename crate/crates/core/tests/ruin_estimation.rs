mod common;

use common::*;
use gou_ruin::levy::{validate, BrownianDriftParams, Model, ModelSpec};
use gou_ruin::ruin::{
    constant_samples, empirical_laplace_check, estimate_cramer_constant, estimate_ruin_curve,
    estimate_ruin_time_cdf, fit_cramer_asymptotics, ConstantConfig, RuinConfig, RuinCurve, RuinError, RuinPoint,
};
use gou_ruin::{lundberg_and_profile, stats};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

fn quick(n: u64, seed: u64) -> RuinConfig {
    RuinConfig { h: 1.0 / 64.0, t_max: 100.0, ..RuinConfig::new(n, seed) }
}

fn synthetic_curve(zs: &[f64], n: u64, hits: impl Fn(usize, f64) -> u64) -> RuinCurve {
    let points = zs
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let k = hits(i, z);
            let (ci_lo, ci_hi) = stats::wilson_interval(k, n);
            RuinPoint {
                z,
                psi_hat: k as f64 / n as f64,
                ci_lo,
                ci_hi,
                n_paths: n,
                n_ruined: k,
                censored_frac: 0.0,
                underflow_frac: 0.0,
            }
        })
        .collect();
    RuinCurve { points, theta: 30.0, t_max: 200.0, h: 1.0 / 256.0, seed: 0 }
}

#[test]
fn bounded_z_model_is_never_ruined_from_two() {
    let m = bounded_z_model();
    let cfg = RuinConfig { force: true, t_max: 60.0, ..quick(4000, 3) };
    let c = estimate_ruin_curve(&m, &[2.0], &cfg).unwrap();
    let p = &c.points[0];
    assert_eq!(p.n_ruined, 0);
    assert_eq!(p.psi_hat, 0.0);
    assert!(p.ci_hi <= 3.0 / 4000.0 + 1e-15);
    // Without the override the unchecked model is refused.
    let gated = estimate_ruin_curve(&m, &[2.0], &quick(10, 3));
    assert!(matches!(gated, Err(RuinError::ConditionGate(_))));
}

#[test]
fn ruin_counts_are_nonincreasing_in_z() {
    for (name, m) in all_models() {
        let c = estimate_ruin_curve(&m, &[0.25, 0.5, 1.0, 2.0, 4.0, 8.0], &quick(2000, 5)).unwrap();
        assert!(c.points.windows(2).all(|w| w[1].n_ruined <= w[0].n_ruined), "{name}");
        for p in &c.points {
            assert!(p.ci_lo <= p.psi_hat && p.psi_hat <= p.ci_hi);
            assert!(p.censored_frac + p.underflow_frac <= 1.0 - p.psi_hat + 1e-12);
        }
    }
}

#[test]
fn unsorted_grid_is_rejected() {
    let m = reference_brownian();
    assert!(matches!(estimate_ruin_curve(&m, &[2.0, 1.0], &quick(10, 1)), Err(RuinError::UnsortedGrid)));
    assert!(matches!(estimate_ruin_curve(&m, &[1.0], &quick(0, 1)), Err(RuinError::ZeroPaths)));
}

#[test]
fn exact_ruin_probability_without_eta_noise() {
    // ξ_t = t + √2 B_t and η_t = -t: ∫e^{-ξ} is 1/Exp(1), so ψ(z) = 1 - e^{-1/z}.
    let m = Model::unchecked(ModelSpec::BrownianDrift(BrownianDriftParams {
        gamma_xi: 1.0,
        gamma_eta: -1.0,
        var_xi: 2.0,
        cov_xi_eta: 0.0,
        var_eta: 0.0,
    }))
    .unwrap();
    let zs = [0.5, 1.0, 2.0, 4.0];
    let n = 20_000;
    let cfg = RuinConfig { h: 1.0 / 128.0, force: true, ..RuinConfig::new(n, 77) };
    let c = estimate_ruin_curve(&m, &zs, &cfg).unwrap();
    for p in &c.points {
        let exact = 1.0 - (-1.0 / p.z).exp();
        let sd = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((p.psi_hat - exact).abs() <= 4.0 * sd + 0.005, "z={}: {} vs {exact}", p.z, p.psi_hat);
    }
}

#[test]
fn positive_constant_for_reference_model() {
    let m = reference_brownian();
    let p = lundberg_and_profile(&m).unwrap();
    let cfg = ConstantConfig { h: 1.0 / 64.0, ..ConstantConfig::from_ruin(&RuinConfig::new(1, 8), 4000) };
    let c = estimate_cramer_constant(&m, &p, &cfg).unwrap();
    assert!(c.estimate > 0.0);
    assert!(c.ci_lo < c.estimate && c.estimate < c.ci_hi);
    assert_eq!(c.block_means.len(), cfg.blocks);
}

#[test]
fn scaling_eta_scales_the_problem() {
    let k = 2.0;
    for m in [cp_gaussian(), brownian(-1.0, 1.0, 0.3)] {
        let mk = validate(m.spec().scale_eta(k)).unwrap();
        let zs = [0.5, 1.0, 2.0];
        let kzs: Vec<f64> = zs.iter().map(|z| k * z).collect();
        let a = estimate_ruin_curve(&m, &zs, &quick(1000, 9)).unwrap();
        let b = estimate_ruin_curve(&mk, &kzs, &quick(1000, 9)).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.n_ruined, q.n_ruined);
        }
        let w = lundberg_and_profile(&m).unwrap().w;
        let cfg = ConstantConfig { h: 1.0 / 64.0, ..ConstantConfig::from_ruin(&RuinConfig::new(1, 10), 500) };
        let s = constant_samples(&m, w, &cfg);
        let sk = constant_samples(&mk, w, &cfg);
        let f = k.powf(w);
        for (x, y) in s.iter().zip(&sk) {
            assert!((y - f * x).abs() <= 1e-12 * (f * x).abs().max(1e-300), "{y} vs {}", f * x);
        }
    }
}

#[test]
fn noiseless_power_law_recovers_slope_and_plateau() {
    let zs = [5.0, 10.0, 20.0, 40.0];
    let n = 1u64 << 40;
    let c = synthetic_curve(&zs, n, |_, z| (0.3 / z * n as f64).round() as u64);
    let f = fit_cramer_asymptotics(&c, 1.0).unwrap();
    assert!((f.slope + 1.0).abs() < 1e-9);
    assert!(f.plateau.iter().all(|p| (p.value - 0.3).abs() < 1e-9));
    assert!((f.plateau_ratio - 1.0).abs() < 1e-9);
}

#[test]
fn slope_intervals_cover_under_binomial_noise() {
    let zs = [5.0, 10.0, 20.0, 40.0];
    let n = 20_000;
    let mut r = rng(99);
    let mut covered = 0;
    for _ in 0..100 {
        let draws: Vec<u64> = zs.iter().map(|z| Binomial::new(n, 0.3 / z).unwrap().sample(&mut r)).collect();
        let f = fit_cramer_asymptotics(&synthetic_curve(&zs, n, |i, _| draws[i]), 1.0).unwrap();
        if (f.slope + 1.0).abs() <= 1.96 * f.slope_se {
            covered += 1;
        }
    }
    assert!(covered >= 90, "covered {covered}/100");
}

#[test]
fn too_few_ruins_is_reported() {
    let c = synthetic_curve(&[1.0, 2.0, 3.0, 4.0, 5.0], 100, |i, _| if i < 3 { 20 } else { 5 });
    assert!(matches!(fit_cramer_asymptotics(&c, 1.0), Err(RuinError::InsufficientRuins { usable: 3 })));
}

#[test]
fn laplace_check_behaviour() {
    let bm = reference_brownian();
    let r = empirical_laplace_check(&bm, &[0.0, 1.0], 100_000, 4).unwrap();
    assert_eq!(r[0].estimate, 0.0);
    assert_eq!(r[0].exact, 0.0);
    assert!(r[1].z_score.abs() <= 3.0, "{:?}", r[1]);
    assert!(!r[1].unstable);

    let jd = jump_diffusion_laplace();
    let r = empirical_laplace_check(&jd, &[-2.9], 100_000, 4).unwrap();
    assert!(r[0].unstable);
    assert!(matches!(empirical_laplace_check(&jd, &[3.0], 10, 4), Err(RuinError::OutOfDomain { .. })));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let m = cp_gaussian();
    let zs = [0.5, 1.0, 2.0];
    let a = estimate_ruin_curve(&m, &zs, &RuinConfig { workers: 1, ..quick(3000, 12) }).unwrap();
    let b = estimate_ruin_curve(&m, &zs, &RuinConfig { workers: 8, ..quick(3000, 12) }).unwrap();
    assert_eq!(a, b);
    let p = lundberg_and_profile(&m).unwrap();
    let base = ConstantConfig { h: 1.0 / 64.0, ..ConstantConfig::from_ruin(&quick(1, 12), 600) };
    let c1 = estimate_cramer_constant(&m, &p, &ConstantConfig { workers: 1, ..base }).unwrap();
    let c8 = estimate_cramer_constant(&m, &p, &ConstantConfig { workers: 8, ..base }).unwrap();
    assert_eq!(c1, c8);
}

#[test]
fn interval_width_shrinks_like_root_n() {
    let m = reference_brownian();
    let width = |n| {
        let p = estimate_ruin_curve(&m, &[2.0], &RuinConfig { h: 1.0 / 32.0, ..RuinConfig::new(n, 13) }).unwrap().points[0];
        p.ci_hi - p.ci_lo
    };
    let ratio = width(4000) / width(16_000);
    assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn stopping_level_is_not_binding() {
    let m = reference_brownian();
    let zs = [2.0, 8.0];
    let a = estimate_ruin_curve(&m, &zs, &RuinConfig { theta: 30.0, ..quick(4000, 14) }).unwrap();
    let b = estimate_ruin_curve(&m, &zs, &RuinConfig { theta: 40.0, ..quick(4000, 14) }).unwrap();
    for (p, q) in a.points.iter().zip(&b.points) {
        let half = 0.5 * (p.ci_hi - p.ci_lo);
        assert!((p.psi_hat - q.psi_hat).abs() < half, "{} vs {}", p.psi_hat, q.psi_hat);
    }
}

#[test]
fn ruin_time_distribution() {
    let m = reference_brownian();
    let xs = [0.25, 0.5, 1.0, 2.0, 4.0, 40.0];
    let cdf = estimate_ruin_time_cdf(&m, 4.0, &xs, &quick(4000, 15)).unwrap();
    assert!(cdf.points.windows(2).all(|w| w[0].n_hits <= w[1].n_hits));
    assert!(cdf.points.iter().all(|p| p.p_hat <= cdf.psi_hat));
    assert!((cdf.points.last().unwrap().p_hat - cdf.psi_hat).abs() <= 2e-3);
    assert!(matches!(estimate_ruin_time_cdf(&m, 1.0, &xs, &quick(10, 1)), Err(RuinError::InvalidConfig(_))));
}

#[test]
fn random_seeds_give_consistent_estimates() {
    let m = reference_brownian();
    let mut r = rng(16);
    let seeds: Vec<u64> = (0..3).map(|_| r.random()).collect();
    let est: Vec<RuinPoint> =
        seeds.iter().map(|&s| estimate_ruin_curve(&m, &[2.0], &quick(4000, s)).unwrap().points[0]).collect();
    for w in est.windows(2) {
        assert!(w[0].ci_lo <= w[1].ci_hi + 0.02 && w[1].ci_lo <= w[0].ci_hi + 0.02);
    }
}
