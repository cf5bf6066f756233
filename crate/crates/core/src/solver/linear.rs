//! Chebyshev semi-iteration for the shifted diffusion operator
//! `A = (1 + shift dt) I - dt Lap`, which is symmetric positive definite
//! for the mirror-ghost Laplacian.
//!
//! The spectrum of `A` on a uniform box is known exactly, so the iteration
//! polynomial depends only on `(grid, dt, shift)` and not on the data. Unlike
//! conjugate gradients, it therefore damps every eigencomponent of the error
//! uniformly: round-off that breaks a reflection symmetry of the data is
//! never amplified, and solutions of symmetric problems stay symmetric far
//! below the residual tolerance.
//!
//! `A 1 = (1 + shift dt) 1`, so when the iteration starts from `x0 = b`
//! and `shift = 0` every correction is orthogonal to the constants and the
//! cell sum of the iterate is preserved up to round-off.

use super::stencil::laplacian_into;
use super::SolverError;
use crate::model::Grid;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinearSolveStats {
    pub iterations: usize,
    pub solves: usize,
    pub worst_relative_residual: f64,
}

fn apply(grid: &Grid, dt: f64, shift: f64, x: &[f64], lap: &mut [f64], out: &mut [f64]) {
    laplacian_into(x, grid, lap);
    let diag = 1.0 + shift * dt;
    for ((o, xi), li) in out.iter_mut().zip(x).zip(lap.iter()) {
        *o = diag * xi - dt * li;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smallest and largest eigenvalue of `A`: the Neumann Laplacian has
/// eigenvalues `-(4 / h^2) sin^2(pi k / 2n)`, `k = 0..n`, per axis.
pub fn spectrum_bounds(grid: &Grid, dt: f64, shift: f64) -> (f64, f64) {
    let lo = 1.0 + shift * dt;
    let mut top = 0.0;
    for axis in 0..grid.dim() {
        let n = grid.cells()[axis] as f64;
        let h = grid.h(axis);
        top += 4.0 / (h * h) * (std::f64::consts::PI * (n - 1.0) / (2.0 * n)).sin().powi(2);
    }
    (lo, lo + dt * top)
}

/// Solves `((1 + shift dt) I - dt Lap) x = rhs` to relative residual `tol`,
/// starting from the current contents of `x`.
pub fn solve_shifted_diffusion(
    grid: &Grid,
    dt: f64,
    shift: f64,
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    stats: &mut LinearSolveStats,
) -> Result<usize, SolverError> {
    let n = grid.len();
    let b_norm = dot(rhs, rhs).sqrt();
    stats.solves += 1;
    if !b_norm.is_finite() {
        return Err(SolverError::LinearSolveDiverged {
            residual: f64::NAN,
            iterations: 0,
        });
    }
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let (lo, hi) = spectrum_bounds(grid, dt, shift);
    let theta = 0.5 * (hi + lo);
    let delta = 0.5 * (hi - lo);
    let mut lap = vec![0.0; n];
    let mut ad = vec![0.0; n];
    apply(grid, dt, shift, x, &mut lap, &mut ad);
    let mut r: Vec<f64> = rhs.iter().zip(&ad).map(|(b, a)| b - a).collect();
    let target = tol * b_norm;
    let max_iter = 10 * n;
    let mut iters = 0;
    let mut rr = dot(&r, &r);
    if delta <= 1e-15 * theta {
        // A is a multiple of the identity.
        for k in 0..n {
            x[k] += r[k] / theta;
        }
        apply(grid, dt, shift, x, &mut lap, &mut ad);
        rr = rhs.iter().zip(&ad).map(|(b, a)| (b - a) * (b - a)).sum();
        iters = 1;
    } else {
        let sigma = theta / delta;
        let mut rho = 1.0 / sigma;
        let mut d: Vec<f64> = r.iter().map(|ri| ri / theta).collect();
        while rr.sqrt() > target {
            if iters >= max_iter || !rr.is_finite() {
                return Err(SolverError::LinearSolveDiverged {
                    residual: rr.sqrt() / b_norm,
                    iterations: iters,
                });
            }
            apply(grid, dt, shift, &d, &mut lap, &mut ad);
            for k in 0..n {
                x[k] += d[k];
                r[k] -= ad[k];
            }
            let rho_next = 1.0 / (2.0 * sigma - rho);
            let (c1, c2) = (rho_next * rho, 2.0 * rho_next / delta);
            for k in 0..n {
                d[k] = c1 * d[k] + c2 * r[k];
            }
            rho = rho_next;
            rr = dot(&r, &r);
            iters += 1;
        }
    }
    stats.iterations += iters;
    stats.worst_relative_residual = stats.worst_relative_residual.max(rr.sqrt() / b_norm);
    Ok(iters)
}
