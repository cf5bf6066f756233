//! Monitored functionals along a run: mass, extrema, the weight `f`, the
//! weighted energy `int u^p f`, the gradient ratios `(x, y, z)` and their
//! quadratic form, bound checks and blow-up detection.

mod checks;
mod fields;
mod record;

pub use checks::{
    blowup_check, bounds_check, energy_monitor, form_check, BoundKind, BoundsTolerance,
    MonitorReport, Violation, FORM_TOL, PLATEAU_FRACTION, PLATEAU_TOL,
};
pub use fields::{
    count_below_floor, gradient_magnitude, quadratic_form_max, weight_field, weighted_energy,
    xyz_fields, XyzFields,
};
pub use record::{format_float, DiagnosticsRecord, Monitor, RecordExtras, SERIES_HEADER};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("energy monitor needs at least 3 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("malformed series row: {0}")]
    MalformedRow(String),
}
