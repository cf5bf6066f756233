//! Parameter algebra behind the boundedness theorem: admissibility of
//! `(alpha, beta)`, the negative-definite witness `(p, r, sigma, eps0)` and
//! the auxiliary constants used as runtime bounds.

mod algebra;
mod constants;
mod quadratic;

pub use algebra::{
    alpha_threshold, beta_feasible, certify, certify_with_grid, discriminant_d, interval_j,
    threshold_denominator, Certificate, DELTA_GRID, DELTA_TOL,
};
pub use constants::{
    c4_bound, eta_bound, kernel_c0_estimate, kernel_sources, theta_exponent, AuxConstants,
    C0Source, KERNEL_STEPS,
};
pub use quadratic::{
    coefficients, find_witness, find_witness_in, minors, sylvester_negative_definite,
    Coefficients, SearchBox, Witness,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("beta = {beta} does not exceed n + sqrt(n/2) for n = {n}")]
    BetaInfeasible { n: u32, beta: f64 },
    #[error("threshold denominator {value} is not positive at delta = {delta} (delta outside J)")]
    DenominatorNonpositive { delta: f64, value: f64 },
    #[error("discriminant {value} is negative at delta = {delta}")]
    NegativeDiscriminant { delta: f64, value: f64 },
    #[error("alpha = {alpha} does not exceed the minimal threshold {threshold}")]
    Infeasible { alpha: f64, threshold: f64 },
    #[error("no negative-definite witness in the search box (best margin {best_margin:.3e}, box {search:?})")]
    NotFound { best_margin: f64, search: SearchBox },
    #[error("witness failed its final check: {0}")]
    WitnessRejected(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
