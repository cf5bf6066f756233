use crate::model::{Grid, SensitivitySpec};

/// Five-point (three-point in 1D) Laplacian with mirror ghost cells, i.e.
/// zero normal flux through every boundary face.
pub fn laplacian_neumann(field: &[f64], grid: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; field.len()];
    laplacian_into(field, grid, &mut out);
    out
}

pub(crate) fn laplacian_into(field: &[f64], grid: &Grid, out: &mut [f64]) {
    debug_assert_eq!(field.len(), grid.len());
    let (nx, ny) = (grid.nx(), grid.ny());
    let ihx2 = 1.0 / (grid.h(0) * grid.h(0));
    let ihy2 = if grid.dim() == 2 {
        1.0 / (grid.h(1) * grid.h(1))
    } else {
        0.0
    };
    for i in 0..nx {
        for j in 0..ny {
            let k = i * ny + j;
            let c = field[k];
            let west = if i > 0 { field[k - ny] } else { c };
            let east = if i + 1 < nx { field[k + ny] } else { c };
            let mut acc = (west - c + (east - c)) * ihx2;
            if grid.dim() == 2 {
                let south = if j > 0 { field[k - 1] } else { c };
                let north = if j + 1 < ny { field[k + 1] } else { c };
                acc += (south - c + (north - c)) * ihy2;
            }
            out[k] = acc;
        }
    }
}

/// Visits every interior face once as `(axis, lower cell, upper cell)`.
/// Boundary faces carry no flux and are skipped.
#[inline]
pub(crate) fn for_each_face<F: FnMut(usize, usize, usize)>(grid: &Grid, mut f: F) {
    let (nx, ny) = (grid.nx(), grid.ny());
    for i in 0..nx {
        for j in 0..ny {
            let k = i * ny + j;
            if i + 1 < nx {
                f(0, k, k + ny);
            }
            if grid.dim() == 2 && j + 1 < ny {
                f(1, k, k + 1);
            }
        }
    }
}

/// `sign * div(u sens(s) grad s)` in conservative finite-volume form.
///
/// On each interior face the flux is `u~ sens(s_bar) ds/dn` with `s_bar` the
/// arithmetic mean of the two cells, `ds/dn` the two-point difference and
/// `u~` the donor (upwind) cell for the transport velocity
/// `-sign * sens(s_bar) ds/dn` that this term induces in `u_t`. Boundary
/// faces carry zero flux, so the cell sum of the result telescopes to zero.
pub fn chemo_flux_div(
    u: &[f64],
    s: &[f64],
    sens: &SensitivitySpec,
    grid: &Grid,
    sign: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    accumulate_chemo_flux_div(u, s, sens, grid, sign, &mut out);
    out
}

/// Adds [`chemo_flux_div`] into `out`; returns how many faces evaluated the
/// sensitivity below its floor (and were clamped).
pub(crate) fn accumulate_chemo_flux_div(
    u: &[f64],
    s: &[f64],
    sens: &SensitivitySpec,
    grid: &Grid,
    sign: f64,
    out: &mut [f64],
) -> usize {
    debug_assert!(u.len() == grid.len() && s.len() == grid.len() && out.len() == grid.len());
    let inv_h = [1.0 / grid.h(0), 1.0 / grid.h(1)];
    let mut clamped = 0;
    for_each_face(grid, |axis, lo, hi| {
        let s_bar = 0.5 * (s[lo] + s[hi]);
        let (coef, was_clamped) = sens.value_clamped(s_bar);
        clamped += was_clamped as usize;
        let grad = (s[hi] - s[lo]) * inv_h[axis];
        let drift = coef * grad;
        let velocity = -sign * drift;
        let donor = if velocity >= 0.0 { u[lo] } else { u[hi] };
        let flux = donor * drift * inv_h[axis] * sign;
        out[lo] += flux;
        out[hi] -= flux;
    });
    clamped
}

/// Per-axis maximum over faces of `|chi(v_bar) dv/dn| + |xi(w_bar) dw/dn|`.
pub fn face_speed_max(
    v: &[f64],
    w: &[f64],
    chi: &SensitivitySpec,
    xi: &SensitivitySpec,
    grid: &Grid,
) -> [f64; 2] {
    let inv_h = [1.0 / grid.h(0), 1.0 / grid.h(1)];
    let mut vmax = [0.0f64; 2];
    for_each_face(grid, |axis, lo, hi| {
        let a = chi.value_clamped(0.5 * (v[lo] + v[hi])).0 * (v[hi] - v[lo]) * inv_h[axis];
        let b = xi.value_clamped(0.5 * (w[lo] + w[hi])).0 * (w[hi] - w[lo]) * inv_h[axis];
        let speed = a.abs() + b.abs();
        // NaN must win so that non-finite states are noticed.
        if speed > vmax[axis] || speed.is_nan() {
            vmax[axis] = speed;
        }
    });
    vmax
}
