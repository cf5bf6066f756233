//! Domain geometry, field state and sensitivity families.

mod grid;
mod sensitivity;
mod state;

pub use grid::{Grid, MIN_CELLS};
pub use sensitivity::{
    Family, Hypothesis, HypothesisCheck, HypothesisReport, HypothesisStatus, SensitivityEval,
    SensitivitySpec, Table, C_BOUND_INFLATION, HYPOTHESIS_SAMPLES, HYPOTHESIS_SPAN,
};
pub use state::SystemState;
pub(crate) use state::{max_of, min_of};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("argument {s} lies below the admissible floor {floor}")]
    Domain { s: f64, floor: f64 },
    #[error("divergent tail integral: {0}")]
    DivergentTail(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field {field} has {got} cells, grid has {expected}")]
    ShapeMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("invalid sensitivity: {0}")]
    InvalidSensitivity(String),
}
