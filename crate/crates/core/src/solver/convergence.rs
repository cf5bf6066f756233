//! Grid-refinement study on the separable decay solution
//! `v(x, t) = e^{-(1 + pi^2) t} cos(pi x)` of `v_t = v_xx - v` on `(0, 1)`
//! (the `u = 0` reduction of the system).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::scheme::{step_with_dt, SchemeConfig};
use super::SolverError;
use crate::model::{Grid, SensitivitySpec, SystemState};

pub const DEFAULT_CELLS: [usize; 3] = [32, 64, 128];
pub const DEFAULT_T_END: f64 = 0.1;
/// Default `dt = DT_PER_H2 * h^2`, which keeps the backward-Euler error on
/// the same `h^2` footing as the spatial error.
pub const DT_PER_H2: f64 = 0.25;
/// Acceptable band for observed spatial orders.
pub const ORDER_BAND: (f64, f64) = (1.7, 2.3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    /// `dt = c h^2`.
    ScaledH2(f64),
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub linf_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Observed order between consecutive rows.
    pub orders: Vec<f64>,
}

impl ConvergenceTable {
    pub fn orders_within(&self, band: (f64, f64)) -> bool {
        !self.orders.is_empty() && self.orders.iter().all(|o| *o >= band.0 && *o <= band.1)
    }
}

pub fn decay_exact(x: f64, t: f64) -> f64 {
    (-(1.0 + PI * PI) * t).exp() * (PI * x).cos()
}

/// Runs the `u = 0` decay problem on a 1D unit interval at each resolution
/// and returns the L-infinity error at `t_end` and the observed orders.
pub fn decay_study(cells: &[usize], policy: DtPolicy, t_end: f64) -> Result<ConvergenceTable, SolverError> {
    if cells.is_empty() {
        return Err(SolverError::InvalidScheme("no resolutions requested".into()));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SolverError::InvalidScheme(format!("t_end must be positive, got {t_end}")));
    }
    let sens = SensitivitySpec::power(1.0, 2.0)?;
    let scheme = SchemeConfig {
        linear_tol: 1e-13,
        t_end,
        ..SchemeConfig::default()
    };
    let mut rows = Vec::with_capacity(cells.len());
    for &n in cells {
        let grid = Grid::new_1d(1.0, n)?;
        let h = grid.h(0);
        let dt_target = match policy {
            DtPolicy::ScaledH2(c) => c * h * h,
            DtPolicy::Fixed(dt) => dt,
        };
        if !(dt_target > 0.0 && dt_target.is_finite()) {
            return Err(SolverError::InvalidScheme(format!("time step {dt_target} is not positive")));
        }
        let steps = (t_end / dt_target).ceil().max(1.0) as usize;
        let dt = t_end / steps as f64;
        // v may be negative here; it is a linear test of the v-equation only.
        let v0 = grid.sample(|c| decay_exact(c[0], 0.0));
        let mut state = SystemState {
            t: 0.0,
            u: vec![0.0; grid.len()],
            v: v0.clone(),
            w: v0,
        };
        for _ in 0..steps {
            state = step_with_dt(&state, &grid, &scheme, &sens, &sens, dt)?.0;
        }
        let exact = grid.sample(|c| decay_exact(c[0], t_end));
        let linf_error = state
            .v
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rows.push(ConvergenceRow {
            cells: n,
            h,
            dt,
            steps,
            linf_error,
        });
    }
    let orders = rows
        .windows(2)
        .map(|w| (w[0].linf_error / w[1].linf_error).ln() / (w[0].h / w[1].h).ln())
        .collect();
    Ok(ConvergenceTable { t_end, rows, orders })
}
