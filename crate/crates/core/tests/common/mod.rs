#![allow(dead_code)]

use gou_ruin::levy::{
    validate, BrownianDriftParams, CpGaussianParams, JumpDiffusionParams, JumpLaw, Model, ModelSpec,
    VarianceGammaParams,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn brownian(gamma_eta: f64, var_eta: f64, cov: f64) -> Model {
    validate(ModelSpec::BrownianDrift(BrownianDriftParams {
        gamma_xi: 1.0,
        gamma_eta,
        var_xi: 2.0,
        cov_xi_eta: cov,
        var_eta,
    }))
    .unwrap()
}

/// The acceptance reference model: `w = 1`, `μ* = 1`, small `η`.
pub fn reference_brownian() -> Model {
    brownian(-0.1, 0.01, 0.0)
}

pub fn cp_gaussian() -> Model {
    validate(ModelSpec::CpGaussian(CpGaussianParams {
        gamma_xi: 0.2,
        gamma_eta: -0.5,
        lambda: 2.0,
        mean_x: 0.3,
        mean_y: 0.1,
        var_x: 0.5,
        cov_xy: 0.1,
        var_y: 0.4,
    }))
    .unwrap()
}

pub fn jump_diffusion_laplace() -> Model {
    validate(ModelSpec::JumpDiffusion(JumpDiffusionParams {
        gamma_xi: 0.8,
        gamma_eta: -0.5,
        sigma2: 0.5,
        lambda: 1.0,
        jump: JumpLaw::Laplace { rho: 3.0 },
    }))
    .unwrap()
}

pub fn jump_diffusion_gaussian() -> Model {
    validate(ModelSpec::JumpDiffusion(JumpDiffusionParams {
        gamma_xi: 0.5,
        gamma_eta: -0.5,
        sigma2: 0.5,
        lambda: 1.5,
        jump: JumpLaw::Gaussian { mean: 0.1, var: 0.3 },
    }))
    .unwrap()
}

pub fn variance_gamma() -> Model {
    validate(ModelSpec::VarianceGamma(VarianceGammaParams {
        gamma_xi: 0.1,
        gamma_eta: -1.0,
        mu: 0.2,
        shape: 1.0,
        rate: 2.0,
    }))
    .unwrap()
}

/// One representative of every family.
pub fn all_models() -> Vec<(&'static str, Model)> {
    vec![
        ("cp_gaussian", cp_gaussian()),
        ("brownian_drift", brownian(-1.0, 1.0, 0.3)),
        ("jump_diffusion_laplace", jump_diffusion_laplace()),
        ("jump_diffusion_gaussian", jump_diffusion_gaussian()),
        ("variance_gamma", variance_gamma()),
    ]
}

/// `(ξ, η)_t = (t + N_t, -t)` with unit-rate jumps of size one.
pub fn bounded_z_model() -> Model {
    Model::unchecked(ModelSpec::CpGaussian(CpGaussianParams {
        gamma_xi: 1.0,
        gamma_eta: -1.0,
        lambda: 1.0,
        mean_x: 1.0,
        mean_y: 0.0,
        var_x: 0.0,
        cov_xy: 0.0,
        var_y: 0.0,
    }))
    .unwrap()
}

/// `ξ_t = t`, `η_t = -t`.
pub fn drift_only() -> Model {
    Model::unchecked(ModelSpec::BrownianDrift(BrownianDriftParams {
        gamma_xi: 1.0,
        gamma_eta: -1.0,
        var_xi: 0.0,
        cov_xi_eta: 0.0,
        var_eta: 0.0,
    }))
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn u(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

/// Random parameter sets that pass validation, `n` per family.
pub fn random_valid_models(family: &str, n: usize, seed: u64) -> Vec<Model> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let spec = match family {
            "cp_gaussian" => {
                let (vx, vy) = (u(&mut r, 0.05, 2.0), u(&mut r, 0.05, 2.0));
                ModelSpec::CpGaussian(CpGaussianParams {
                    gamma_xi: u(&mut r, -0.5, 1.5),
                    gamma_eta: u(&mut r, -1.0, 1.0),
                    lambda: u(&mut r, 0.1, 4.0),
                    mean_x: u(&mut r, -0.5, 1.5),
                    mean_y: u(&mut r, -1.0, 1.0),
                    var_x: vx,
                    cov_xy: u(&mut r, -0.95, 0.95) * (vx * vy).sqrt(),
                    var_y: vy,
                })
            }
            "brownian_drift" => {
                let (vx, ve) = (u(&mut r, 0.05, 3.0), u(&mut r, 0.05, 3.0));
                ModelSpec::BrownianDrift(BrownianDriftParams {
                    gamma_xi: u(&mut r, 0.01, 3.0),
                    gamma_eta: u(&mut r, -2.0, 2.0),
                    var_xi: vx,
                    cov_xi_eta: u(&mut r, -0.95, 0.95) * (vx * ve).sqrt(),
                    var_eta: ve,
                })
            }
            "jump_diffusion" => {
                let jump = if r.random::<bool>() {
                    JumpLaw::Laplace { rho: u(&mut r, 0.3, 6.0) }
                } else {
                    JumpLaw::Gaussian { mean: u(&mut r, -1.0, 1.0), var: u(&mut r, 0.0, 2.0) }
                };
                ModelSpec::JumpDiffusion(JumpDiffusionParams {
                    gamma_xi: u(&mut r, 0.01, 2.0),
                    gamma_eta: u(&mut r, -2.0, 1.0),
                    sigma2: u(&mut r, 0.05, 2.0),
                    lambda: u(&mut r, 0.1, 3.0),
                    jump,
                })
            }
            "variance_gamma" => ModelSpec::VarianceGamma(VarianceGammaParams {
                gamma_xi: u(&mut r, -0.5, 1.5),
                gamma_eta: u(&mut r, -2.0, 0.0),
                mu: u(&mut r, -1.0, 1.5),
                shape: u(&mut r, 0.2, 3.0),
                rate: u(&mut r, 0.3, 4.0),
            }),
            other => panic!("unknown family {other}"),
        };
        if let Ok(m) = validate(spec) {
            out.push(m);
        }
    }
    out
}

pub const FAMILIES: [&str; 4] = ["cp_gaussian", "brownian_drift", "jump_diffusion", "variance_gamma"];

/// Closed form of `Z_t` for the bounded model given its jump times.
pub fn bounded_z_closed_form(t: f64, jump_times: &[f64]) -> f64 {
    let taus: Vec<f64> = jump_times.iter().copied().filter(|&s| s <= t).collect();
    let e = std::f64::consts::E;
    let sum: f64 = taus.iter().enumerate().map(|(i, tau)| (-tau - (i + 1) as f64).exp()).sum();
    -1.0 + (e - 1.0) * sum + (-t - taus.len() as f64).exp()
}
