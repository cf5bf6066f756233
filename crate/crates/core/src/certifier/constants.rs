//! Auxiliary constants: the lower bounds `eta` for the signals, a numeric
//! stand-in for the kernel lower bound `c0`, the weight floor `c4` and the
//! interpolation exponent `theta`.

use serde::{Deserialize, Serialize};

use crate::model::{Grid, ModelError, SensitivitySpec};
use crate::solver::linear::{solve_shifted_diffusion, LinearSolveStats};

/// `sup_{tau > 0} min { e^{-2 tau} z0_min, c0 m (1 - e^{-tau}) }`.
///
/// With `q = e^{-tau}` the first branch `z0_min q^2` increases in `q` and the
/// second `c0 m (1 - q)` decreases, so the supremum sits at their crossing,
/// located here by bisection in `q` down to machine precision.
pub fn eta_bound(z0_min: f64, m: f64, c0: f64) -> f64 {
    if !(z0_min > 0.0 && m > 0.0 && c0 > 0.0) {
        return 0.0;
    }
    let cm = c0 * m;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if z0_min * mid * mid < cm * (1.0 - mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    (z0_min * q * q).min(cm * (1.0 - q)).min(z0_min)
}

/// Steps used by [`kernel_c0_estimate`] over the horizon `tau`.
pub const KERNEL_STEPS: usize = 64;

/// Cells used as point sources: corners, edge midpoints and the center,
/// without duplicates.
pub fn kernel_sources(grid: &Grid) -> Vec<(usize, usize)> {
    let xs = [0, grid.nx() / 2, grid.nx() - 1];
    let ys = if grid.dim() == 2 {
        vec![0, grid.ny() / 2, grid.ny() - 1]
    } else {
        vec![0]
    };
    let mut out = Vec::new();
    for &i in &xs {
        for &j in &ys {
            if !out.contains(&(i, j)) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Lower bound of the discrete Neumann kernel of `phi_t = Lap phi - phi`
/// at time `tau`: every source in [`kernel_sources`] releases unit mass
/// from a single cell, the datum is evolved by backward Euler with
/// `dt = tau / 64`, and the smallest value seen anywhere is returned.
pub fn kernel_c0_estimate(grid: &Grid, tau: f64) -> Result<f64, crate::solver::SolverError> {
    let dt = tau / KERNEL_STEPS as f64;
    let mut worst = f64::INFINITY;
    let mut stats = LinearSolveStats::default();
    for (i, j) in kernel_sources(grid) {
        let mut phi = vec![0.0; grid.len()];
        phi[grid.index(i, j)] = 1.0 / grid.cell_volume();
        for _ in 0..KERNEL_STEPS {
            let rhs = phi.clone();
            solve_shifted_diffusion(grid, dt, 1.0, &rhs, &mut phi, 1e-12, &mut stats)?;
        }
        worst = worst.min(phi.iter().copied().fold(f64::INFINITY, f64::min));
    }
    Ok(worst)
}

/// `exp(-r int_{eta1}^inf chi - sigma int_{eta2}^inf xi)`, the lower bound of
/// the weight; the floors are taken from the specs.
pub fn c4_bound(
    chi: &SensitivitySpec,
    xi: &SensitivitySpec,
    r: f64,
    sigma: f64,
) -> Result<f64, ModelError> {
    let mut exponent = 0.0;
    if r != 0.0 {
        exponent += r * chi.tail(chi.eta_floor)?;
    }
    if sigma != 0.0 {
        exponent += sigma * xi.tail(xi.eta_floor)?;
    }
    Ok((-exponent).exp())
}

/// `(pn/2 - n/2) / (pn/2 + 1 - n/2)`; lies in `(0, 1)` for `p > 1`.
pub fn theta_exponent(p: f64, n: u32) -> f64 {
    let half_n = n as f64 / 2.0;
    let num = p * half_n - half_n;
    num / (num + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Source {
    /// Numerical estimate from [`kernel_c0_estimate`]; a stand-in, since the
    /// continuum constant has no closed form.
    Estimated,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxConstants {
    pub eta1: f64,
    pub eta2: f64,
    pub c0: f64,
    pub c0_source: C0Source,
    /// `None` when a tail integral diverges (exploratory runs only).
    pub c4: Option<f64>,
    pub theta: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eta_examples() {
        assert_eq!(eta_bound(0.0, 3.0, 2.0), 0.0);
        assert_abs_diff_eq!(eta_bound(1.0, 1.0, 1.0), (3.0 - 5f64.sqrt()) / 2.0, epsilon = 1e-12);
        let big = eta_bound(1.0, 1e8, 1.0);
        assert!(big < 1.0 && big > 1.0 - 1e-7);
    }

    #[test]
    fn eta_matches_closed_form_crossing() {
        for &(z, m, c) in &[(2.0, 0.5, 0.3), (7.0, 3.0, 0.37), (0.01, 100.0, 1.0)] {
            let cm: f64 = c * m;
            let q = (-cm + (cm * cm + 4.0 * z * cm).sqrt()) / (2.0 * z);
            assert_abs_diff_eq!(eta_bound(z, m, c), z * q * q, epsilon = 1e-12 * z);
        }
    }

    #[test]
    fn c4_examples() {
        let chi = SensitivitySpec::power(1.0, 2.0).unwrap();
        let xi = SensitivitySpec::constant(1.0).unwrap();
        assert_eq!(c4_bound(&chi, &xi, 0.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(c4_bound(&chi, &xi, 1.0, 0.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        let chi1 = chi.clone().with_eta_floor(1.0).unwrap();
        assert_abs_diff_eq!(c4_bound(&chi1, &xi, 1.0, 0.0).unwrap(), (-0.5f64).exp(), epsilon = 1e-15);
        assert!(matches!(
            c4_bound(&chi, &xi, 1.0, 0.5),
            Err(ModelError::DivergentTail(_))
        ));
    }

    #[test]
    fn theta_examples() {
        assert_abs_diff_eq!(theta_exponent(2.0, 2), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(theta_exponent(3.0, 2), 2.0 / 3.0, epsilon = 1e-15);
        let t = theta_exponent(1.0 + 1e-9, 3);
        assert!(t > 0.0 && t < 1e-8);
    }

    #[test]
    fn kernel_sources_cover_corners_edges_center() {
        let g2 = Grid::new_2d([1.0, 1.0], [8, 8]).unwrap();
        assert_eq!(kernel_sources(&g2).len(), 9);
        let g1 = Grid::new_1d(1.0, 8).unwrap();
        assert_eq!(kernel_sources(&g1), vec![(0, 0), (4, 0), (7, 0)]);
    }

    #[test]
    fn kernel_estimate_is_positive() {
        let g = Grid::new_2d([1.0, 1.0], [8, 8]).unwrap();
        let c0 = kernel_c0_estimate(&g, 1.0).unwrap();
        assert!(c0 > 0.0);
        // The mean decays by the backward-Euler factor, spread over unit area.
        let mean = (1.0 + 1.0 / KERNEL_STEPS as f64).powi(-(KERNEL_STEPS as i32));
        assert!(c0 < mean && c0 > 0.9 * mean, "{c0} vs {mean}");
    }
}
