//! Cramér-type ruin asymptotics for generalised Ornstein–Uhlenbeck processes
//! `V_t = e^{ξ_t} (z + ∫_0^t e^{-ξ_{s-}} dη_s)` driven by a bivariate Lévy
//! process `(ξ, η)`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cramer;
pub mod levy;
pub mod paths;
pub mod rng;
pub mod ruin;
pub mod stats;

pub use cramer::{
    check_conditions, fenchel_legendre, lundberg_and_profile, rate_function, ConditionReport,
    CramerError, CramerProfile, Verdict,
};
pub use levy::{validate, Model, ModelError, ModelSpec};
