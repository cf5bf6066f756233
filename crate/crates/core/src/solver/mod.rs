//! Conservative finite-volume IMEX integration of the chemotaxis system on
//! a box with zero-flux boundaries.
//!
//! Everything here runs single-threaded with fixed summation order, so a
//! given setup reproduces bit for bit.

pub mod convergence;
pub mod linear;
mod run;
mod scheme;
pub mod snapshot;
mod stencil;

pub use run::{run, Observer, RunResult, RunSetup, RunStats, RunStatus, DT_COLLAPSE_FRACTION};
pub use scheme::{
    dt_stable, step, step_with_dt, DiffusionMode, SchemeConfig, StepReport, TimeStep,
};
pub use stencil::{chemo_flux_div, face_speed_max, laplacian_neumann};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("linear solve did not reach tolerance (relative residual {residual:.3e} after {iterations} iterations)")]
    LinearSolveDiverged { residual: f64, iterations: usize },
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("step limit of {steps} reached at t = {t}")]
    StepLimit { steps: usize, t: f64 },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("observer: {0}")]
    Observer(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
