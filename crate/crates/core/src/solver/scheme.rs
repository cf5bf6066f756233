use serde::{Deserialize, Serialize};

use super::linear::{solve_shifted_diffusion, LinearSolveStats};
use super::stencil::{accumulate_chemo_flux_div, face_speed_max, laplacian_into};
use super::SolverError;
use crate::model::{max_of, min_of, Grid, SensitivitySpec, SystemState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    Fixed(f64),
    /// CFL-limited step recomputed every step.
    #[serde(rename = "adaptive")]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionMode {
    Implicit,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: TimeStep,
    pub dt_max: f64,
    pub cfl: f64,
    pub diffusion_mode: DiffusionMode,
    pub linear_tol: f64,
    pub t_end: f64,
    pub u_floor: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            dt: TimeStep::Auto,
            dt_max: 1e-2,
            cfl: 0.5,
            diffusion_mode: DiffusionMode::Implicit,
            linear_tol: 1e-10,
            t_end: 1.0,
            u_floor: 1e-12,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidScheme(msg));
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return bad(format!("dt_max must be positive, got {}", self.dt_max));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.linear_tol > 0.0 && self.linear_tol < 1.0) {
            return bad(format!("linear_tol must lie in (0, 1), got {}", self.linear_tol));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if !(self.u_floor >= 0.0 && self.u_floor < 1.0) {
            return bad(format!("u_floor must lie in [0, 1), got {}", self.u_floor));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt_used: f64,
    /// `(int u after - int u before) / int u before`, taken before clamping.
    pub mass_drift: f64,
    /// Magnitude of the most negative `u` produced by the step (before
    /// clamping), or 0.
    pub positivity_violation: f64,
    /// `max u` after the step, for relative positivity checks.
    pub u_max: f64,
    pub linear_iters: usize,
    /// Face evaluations of a sensitivity below its floor.
    pub clamped_evaluations: usize,
}

/// Largest stable step: `min(dt_max, cfl / sum_a (vmax_a / h_a))`, which is
/// `cfl h / vmax` in 1D, and additionally `h^2 / (2 dim)` for explicit
/// diffusion. Summing over axes bounds the total outflow of a cell by
/// `2 cfl` of its content, so `cfl <= 1/2` keeps upwind transport positive.
pub fn dt_stable(
    state: &SystemState,
    grid: &Grid,
    scheme: &SchemeConfig,
    chi: &SensitivitySpec,
    xi: &SensitivitySpec,
) -> f64 {
    let vmax = face_speed_max(&state.v, &state.w, chi, xi, grid);
    let mut dt = scheme.dt_max;
    let mut rate = 0.0;
    for axis in 0..grid.dim() {
        if vmax[axis].is_nan() {
            return f64::NAN;
        }
        rate += vmax[axis] / grid.h(axis);
    }
    if rate > 0.0 {
        dt = dt.min(scheme.cfl / rate);
    }
    if scheme.diffusion_mode == DiffusionMode::Explicit {
        let h = grid.h_min();
        dt = dt.min(h * h / (2.0 * grid.dim() as f64));
    }
    dt
}

/// One step with the scheme's own step size (fixed or [`dt_stable`]).
pub fn step(
    state: &SystemState,
    grid: &Grid,
    scheme: &SchemeConfig,
    chi: &SensitivitySpec,
    xi: &SensitivitySpec,
) -> Result<(SystemState, StepReport), SolverError> {
    let dt = match scheme.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => dt_stable(state, grid, scheme, chi, xi),
    };
    step_with_dt(state, grid, scheme, chi, xi, dt)
}

/// First-order splitting:
/// 1. explicit upwind chemotaxis transport of `u`,
/// 2. diffusion of `u` (backward Euler unless explicit mode is selected),
/// 3. `v` and `w` with implicit diffusion and decay and explicit source `u`.
///
/// Negative values of `u` are clamped to zero after being recorded.
pub fn step_with_dt(
    state: &SystemState,
    grid: &Grid,
    scheme: &SchemeConfig,
    chi: &SensitivitySpec,
    xi: &SensitivitySpec,
    dt: f64,
) -> Result<(SystemState, StepReport), SolverError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SolverError::InvalidScheme(format!("step size {dt} is not positive")));
    }
    let n = grid.len();
    let mass_before: f64 = state.u.iter().sum();

    let mut transport = vec![0.0; n];
    let mut clamped = accumulate_chemo_flux_div(&state.u, &state.v, chi, grid, -1.0, &mut transport);
    clamped += accumulate_chemo_flux_div(&state.u, &state.w, xi, grid, 1.0, &mut transport);
    let u_star: Vec<f64> = state
        .u
        .iter()
        .zip(&transport)
        .map(|(u, t)| u + dt * t)
        .collect();

    if u_star.iter().any(|x| !x.is_finite()) {
        // Nothing sensible can be solved; hand the broken state back so the
        // caller's blow-up check sees it.
        let report = StepReport {
            dt_used: dt,
            mass_drift: f64::NAN,
            positivity_violation: 0.0,
            u_max: f64::NAN,
            linear_iters: 0,
            clamped_evaluations: clamped,
        };
        return Ok((
            SystemState {
                t: state.t + dt,
                u: u_star,
                v: state.v.clone(),
                w: state.w.clone(),
            },
            report,
        ));
    }

    let mut stats = LinearSolveStats::default();
    let tol = scheme.linear_tol;
    let (mut u, v, w) = match scheme.diffusion_mode {
        DiffusionMode::Implicit => {
            let mut u = u_star.clone();
            solve_shifted_diffusion(grid, dt, 0.0, &u_star, &mut u, tol, &mut stats)?;
            let rhs_v: Vec<f64> = state.v.iter().zip(&u).map(|(v, u)| v + dt * u).collect();
            let mut v = state.v.clone();
            solve_shifted_diffusion(grid, dt, 1.0, &rhs_v, &mut v, tol, &mut stats)?;
            let rhs_w: Vec<f64> = state.w.iter().zip(&u).map(|(w, u)| w + dt * u).collect();
            let mut w = state.w.clone();
            solve_shifted_diffusion(grid, dt, 1.0, &rhs_w, &mut w, tol, &mut stats)?;
            (u, v, w)
        }
        DiffusionMode::Explicit => {
            let mut lap = vec![0.0; n];
            laplacian_into(&u_star, grid, &mut lap);
            let u: Vec<f64> = u_star.iter().zip(&lap).map(|(u, l)| u + dt * l).collect();
            laplacian_into(&state.v, grid, &mut lap);
            let v: Vec<f64> = (0..n)
                .map(|k| state.v[k] + dt * (lap[k] - state.v[k] + u[k]))
                .collect();
            laplacian_into(&state.w, grid, &mut lap);
            let w: Vec<f64> = (0..n)
                .map(|k| state.w[k] + dt * (lap[k] - state.w[k] + u[k]))
                .collect();
            (u, v, w)
        }
    };

    let mass_after: f64 = u.iter().sum();
    let mass_drift = if mass_before > 0.0 {
        (mass_after - mass_before) / mass_before
    } else {
        mass_after - mass_before
    };
    let u_min = min_of(&u);
    let u_max = max_of(&u);
    if u_min < 0.0 {
        u.iter_mut().for_each(|x| *x = x.max(0.0));
    }

    Ok((
        SystemState {
            t: state.t + dt,
            u,
            v,
            w,
        },
        StepReport {
            dt_used: dt,
            mass_drift,
            positivity_violation: (-u_min).max(0.0),
            u_max,
            linear_iters: stats.iterations,
            clamped_evaluations: clamped,
        },
    ))
}
