mod common;

use common::*;
use gou_ruin::cramer::{
    check_conditions, fenchel_legendre, lundberg_and_profile, rate_function, solve_derivative, CramerError, Verdict,
    ROOT_TOLERANCE,
};
use gou_ruin::levy::{CpGaussianParams, JumpLaw, Model, ModelSpec};
use proptest::prelude::*;
use rand::Rng;

/// Golden-section maximisation of `αv - c(α)` over a finite window.
fn conjugate_oracle(m: &Model, v: f64, lo: f64, hi: f64) -> f64 {
    let f = |a: f64| a * v - m.laplace_exponent_extended(a);
    let (mut a, mut b) = (lo, hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b))
}

fn window(m: &Model) -> (f64, f64) {
    let d = m.domain();
    let lo = if d.lo.is_finite() { d.lo * (1.0 - 1e-12) } else { -60.0 };
    let hi = if d.hi.is_finite() { d.hi * (1.0 - 1e-12) } else { 60.0 };
    (lo, hi)
}

#[test]
fn roots_for_random_models_of_every_family() {
    for fam in FAMILIES {
        for m in random_valid_models(fam, 50, 101) {
            let p = lundberg_and_profile(&m).unwrap();
            assert!(m.domain().contains(p.w) && p.w > 0.0);
            assert!(m.laplace_exponent(p.w).unwrap().abs() <= ROOT_TOLERANCE);
            assert!(p.mu_star > 0.0);
            if let ModelSpec::JumpDiffusion(jd) = m.spec() {
                if let JumpLaw::Laplace { rho } = jd.jump {
                    assert!(p.w < rho);
                }
            }
        }
    }
}

#[test]
fn conjugate_matches_golden_section_oracle() {
    let mut r = rng(17);
    for fam in FAMILIES {
        for m in random_valid_models(fam, 10, 202) {
            let (lo, hi) = window(&m);
            for _ in 0..5 {
                let a = r.random_range(lo * 0.5..hi * 0.5);
                let v = m.laplace_exponent_derivatives(a).unwrap().0;
                let got = fenchel_legendre(&m, v);
                let oracle = conjugate_oracle(&m, v, lo, hi);
                assert!(got >= oracle - 1e-9 * oracle.abs().max(1.0), "{fam}: {got} < {oracle}");
                assert!((got - oracle).abs() <= 1e-6 * oracle.abs().max(1.0), "{fam}: {got} vs {oracle}");
            }
        }
    }
}

#[test]
fn variance_gamma_conjugate_far_in_the_tails() {
    // c' maps the VG domain onto the whole line, so even very negative slopes
    // have an interior maximiser close to the lower singularity.
    let m = variance_gamma();
    let (lo, hi) = window(&m);
    for v in [-1e4, -100.0, 100.0, 1e4] {
        let a = solve_derivative(&m, v);
        assert!(m.domain().contains(a));
        let got = fenchel_legendre(&m, v);
        let oracle = conjugate_oracle(&m, v, lo, hi);
        assert!((got - oracle).abs() <= 1e-6 * oracle.abs().max(1.0), "v={v}: {got} vs {oracle}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fenchel_young_inequality(seed in 0u64..100_000, fam in 0usize..4, t in 0.0f64..1.0, v in -20.0f64..20.0) {
        let m = &random_valid_models(FAMILIES[fam], 1, seed)[0];
        let (lo, hi) = window(m);
        let a = lo + (hi - lo) * t;
        let c = m.laplace_exponent(a).unwrap();
        prop_assert!(fenchel_legendre(m, v) >= a * v - c - 1e-9);
    }

    #[test]
    fn envelope_identity(seed in 0u64..100_000, fam in 0usize..4, t in 0.05f64..0.95) {
        let m = &random_valid_models(FAMILIES[fam], 1, seed)[0];
        let (lo, hi) = window(m);
        let (lo, hi) = (lo.max(-10.0), hi.min(10.0));
        let a = lo + (hi - lo) * t;
        let v = m.laplace_exponent_derivatives(a).unwrap().0;
        let expect = a * v - m.laplace_exponent(a).unwrap();
        prop_assert!((fenchel_legendre(m, v) - expect).abs() <= 1e-8 * expect.abs().max(1.0));
    }
}

#[test]
fn rate_function_shape_for_random_models() {
    for fam in FAMILIES {
        for m in random_valid_models(fam, 10, 303) {
            let p = lundberg_and_profile(&m).unwrap();
            let end = p.flat_from();
            let xs: Vec<f64> = (1..=200).map(|i| p.x0 + (2.0 * end - p.x0) * i as f64 / 201.0).collect();
            let rs: Vec<f64> = xs.iter().map(|&x| rate_function(&p, &m, x).unwrap()).collect();
            for (w, r) in xs.windows(2).zip(rs.windows(2)) {
                if w[1] < end {
                    assert!(r[1] < r[0], "{fam}: not decreasing at x={}", w[1]);
                }
                if w[0] >= end {
                    assert_eq!(r[0], p.w);
                }
                assert!(r[0] >= p.w - 1e-9);
            }
            let left = rate_function(&p, &m, end * (1.0 - 1e-9)).unwrap();
            assert!((left - p.w).abs() < 1e-6, "{fam}: jump {left} vs {}", p.w);
        }
    }
}

#[test]
fn positive_x0_for_bounded_slope() {
    // ξ_t = -t/2 + N_t: c'(α) = 1/2 - e^{-α} increases to 1/2, so x0 = 2.
    let m = Model::unchecked(ModelSpec::CpGaussian(CpGaussianParams {
        gamma_xi: -0.5,
        gamma_eta: -1.0,
        lambda: 1.0,
        mean_x: 1.0,
        mean_y: 0.0,
        var_x: 0.0,
        cov_xy: 0.0,
        var_y: 0.0,
    }))
    .unwrap();
    let p = lundberg_and_profile(&m).unwrap();
    assert!((p.x0 - 2.0).abs() < 1e-12);
    assert!((0.5 * p.w - (1.0 - (-p.w).exp())).abs() < 1e-10);
    assert!(matches!(rate_function(&p, &m, 2.0), Err(CramerError::BelowX0 { .. })));
    // At the boundary slope v = 1/2 the conjugate is the finite limit 1, so
    // R(x0+) = 2.
    assert!((rate_function(&p, &m, 2.0 + 1e-9).unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(fenchel_legendre(&m, 0.6), f64::INFINITY);
}

#[test]
fn reference_profile_closed_form() {
    let m = reference_brownian();
    let p = lundberg_and_profile(&m).unwrap();
    assert!((p.w - 1.0).abs() < 1e-8);
    assert!((p.mu_star - 1.0).abs() < 1e-8);
    assert_eq!(p.x0, 0.0);
    let r = check_conditions(&m, Some(&p));
    assert!(r.all_verified());
}

#[test]
fn bounded_z_model_has_no_cramer_root() {
    let m = bounded_z_model();
    assert_eq!(lundberg_and_profile(&m), Err(CramerError::NoPositiveRoot));
    let r = check_conditions(&m, None);
    assert_eq!(r.cond_b.verdict, Verdict::Failed);
}
