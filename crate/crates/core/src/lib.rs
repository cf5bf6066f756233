//! Numerical laboratory for the fully parabolic attraction-repulsion
//! chemotaxis system with signal-dependent sensitivities
//!
//! ```text
//! u_t = Lap u - div(u chi(v) grad v) + div(u xi(w) grad w)
//! v_t = Lap v - v + u
//! w_t = Lap w - w + u
//! ```
//!
//! on a box with homogeneous Neumann boundary conditions.
//!
//! * [`model`] holds the grid, the state and the sensitivity families.
//! * [`certifier`] checks the structural conditions on `(alpha, beta)` and
//!   searches a negative-definite witness for the weighted energy estimate.
//! * [`solver`] integrates the system with a conservative finite-volume
//!   IMEX scheme.
//! * [`diagnostics`] evaluates the monitored functionals along a run.
//! * [`config`] parses run configurations and resolves `auto` fields.

pub mod certifier;
pub mod config;
pub mod diagnostics;
pub mod model;
pub mod solver;

pub use model::{Grid, SensitivitySpec, SystemState};
