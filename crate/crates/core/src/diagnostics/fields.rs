use crate::certifier::Coefficients;
use crate::model::{max_of, Grid, SensitivitySpec, SystemState};

/// `f = exp(-r int_{eta1}^{v} chi - sigma int_{eta2}^{w} xi)` cell by cell,
/// with `v`, `w` clamped to their floors from below.
pub fn weight_field(
    state: &SystemState,
    chi: &SensitivitySpec,
    xi: &SensitivitySpec,
    r: f64,
    sigma: f64,
) -> Vec<f64> {
    state
        .v
        .iter()
        .zip(&state.w)
        .map(|(&v, &w)| {
            let mut e = 0.0;
            if r != 0.0 {
                e += r * chi.integral_from_floor(v);
            }
            if sigma != 0.0 {
                e += sigma * xi.integral_from_floor(w);
            }
            (-e).exp()
        })
        .collect()
}

/// Cells where `v` or `w` sits below its sensitivity floor.
pub fn count_below_floor(state: &SystemState, chi: &SensitivitySpec, xi: &SensitivitySpec) -> usize {
    state
        .v
        .iter()
        .zip(&state.w)
        .filter(|(&v, &w)| v < chi.eta_floor || w < xi.eta_floor)
        .count()
}

/// `sum u_i^p f_i` times the cell volume.
pub fn weighted_energy(u: &[f64], p: f64, f: &[f64], grid: &Grid) -> f64 {
    u.iter().zip(f).map(|(u, f)| u.powf(p) * f).sum::<f64>() * grid.cell_volume()
}

/// Central-difference gradient magnitude at every cell, using mirror
/// ghosts at the boundary.
pub fn gradient_magnitude(field: &[f64], grid: &Grid) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.h(0), grid.h(1));
    let mut out = Vec::with_capacity(field.len());
    for i in 0..nx {
        for j in 0..ny {
            let k = i * ny + j;
            let west = if i > 0 { field[k - ny] } else { field[k] };
            let east = if i + 1 < nx { field[k + ny] } else { field[k] };
            let gx = (east - west) / (2.0 * hx);
            let g2 = if grid.dim() == 2 {
                let south = if j > 0 { field[k - 1] } else { field[k] };
                let north = if j + 1 < ny { field[k + 1] } else { field[k] };
                let gy = (north - south) / (2.0 * hy);
                gx * gx + gy * gy
            } else {
                gx * gx
            };
            out.push(g2.sqrt());
        }
    }
    out
}

/// The gradient ratios `x = |grad u| / u`, `y = chi(v) |grad v|`,
/// `z = xi(w) |grad w|`. Cells with `u` at or below `u_floor * max u` are
/// flagged in `excluded` and carry `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct XyzFields {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub excluded: Vec<bool>,
}

impl XyzFields {
    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|e| **e).count()
    }
}

pub fn xyz_fields(
    state: &SystemState,
    chi: &SensitivitySpec,
    xi: &SensitivitySpec,
    grid: &Grid,
    u_floor: f64,
) -> XyzFields {
    let threshold = u_floor * max_of(&state.u).max(0.0);
    let gu = gradient_magnitude(&state.u, grid);
    let gv = gradient_magnitude(&state.v, grid);
    let gw = gradient_magnitude(&state.w, grid);
    let excluded: Vec<bool> = state
        .u
        .iter()
        .map(|&u| !(u > 0.0 && u >= threshold))
        .collect();
    let x = gu
        .iter()
        .zip(&state.u)
        .zip(&excluded)
        .map(|((g, u), ex)| if *ex { 0.0 } else { g / u })
        .collect();
    let y = gv
        .iter()
        .zip(&state.v)
        .map(|(g, v)| chi.value_clamped(*v).0 * g)
        .collect();
    let z = gw
        .iter()
        .zip(&state.w)
        .map(|(g, w)| xi.value_clamped(*w).0 * g)
        .collect();
    XyzFields { x, y, z, excluded }
}

/// Maximum of `Q(x, y, z)` over the cells not excluded; 0 when every cell is
/// excluded.
pub fn quadratic_form_max(coeffs: &Coefficients, xyz: &XyzFields) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for k in 0..xyz.x.len() {
        if !xyz.excluded[k] {
            best = best.max(coeffs.form(xyz.x[k], xyz.y[k], xyz.z[k]));
        }
    }
    if best == f64::NEG_INFINITY {
        0.0
    } else {
        best
    }
}
