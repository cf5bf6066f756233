//! The gradient quadratic form of the weighted energy estimate
//!
//! ```text
//! Q(x, y, z) = a1(eps) x^2 + a2 xy + a3 xz + a4 y^2 + a5 yz + a6 z^2
//! ```
//!
//! and the search for weights `(p, r, sigma)` and a slack `eps0` that make
//! it negative definite, certified through leading principal minors and
//! cross-checked through eigenvalues.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{certify, CertifyError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
}

impl Coefficients {
    pub fn as_array(&self) -> [f64; 6] {
        [self.a1, self.a2, self.a3, self.a4, self.a5, self.a6]
    }

    /// `max |a_i|`, the scale used for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.as_array().iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// Symmetric matrix in the variable order `(x, z, y)`.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.a1,
            self.a3 / 2.0,
            self.a2 / 2.0,
            self.a3 / 2.0,
            self.a6,
            self.a5 / 2.0,
            self.a2 / 2.0,
            self.a5 / 2.0,
            self.a4,
        )
    }

    /// Eigenvalues of [`Coefficients::matrix`] in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        [ev[0], ev[1], ev[2]]
    }

    #[inline]
    pub fn form(&self, x: f64, y: f64, z: f64) -> f64 {
        self.a1 * x * x
            + self.a2 * x * y
            + self.a3 * x * z
            + self.a4 * y * y
            + self.a5 * y * z
            + self.a6 * z * z
    }
}

pub fn coefficients(p: f64, r: f64, sigma: f64, alpha: f64, beta: f64, eps: f64) -> Coefficients {
    Coefficients {
        a1: -(1.0 - eps) * p * (p - 1.0),
        a2: p * (p + 2.0 * r - 1.0),
        a3: p * (p + 2.0 * sigma - 1.0),
        a4: -r * (p + r + alpha),
        a5: p * r + p * sigma + 2.0 * r * sigma,
        a6: -sigma * (-p + sigma + beta),
    }
}

/// `(A1, A2)`: the 2x2 leading minor and the full determinant of the
/// symmetric matrix with rows `(a1, a3/2, a2/2)`, `(a3/2, a6, a5/2)`,
/// `(a2/2, a5/2, a4)`.
pub fn minors(c: &Coefficients) -> (f64, f64) {
    let (m12, m13, m23) = (c.a3 / 2.0, c.a2 / 2.0, c.a5 / 2.0);
    let a1 = c.a1 * c.a6 - m12 * m12;
    let a2 = c.a1 * (c.a6 * c.a4 - m23 * m23) - m12 * (m12 * c.a4 - m23 * m13)
        + m13 * (m12 * m23 - c.a6 * m13);
    (a1, a2)
}

/// Negative definiteness by Sylvester: `a1 < 0`, `A1 > 0`, `A2 < 0`.
pub fn sylvester_negative_definite(c: &Coefficients) -> bool {
    let (a1m, a2m) = minors(c);
    c.a1 < 0.0 && a1m > 0.0 && a2m < 0.0
}

/// Search-box layout for [`find_witness_in`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    /// Offsets of `p` above `n/2`: `[p_offset_min, p_offset_max]`, log-spaced.
    pub p_offset_min: f64,
    pub p_offset_max: f64,
    pub p_points: usize,
    pub weight_min: f64,
    pub weight_max: f64,
    pub weight_points: usize,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self {
            p_offset_min: 1e-3,
            p_offset_max: 4.0,
            p_points: 32,
            weight_min: 1e-2,
            weight_max: 1e2,
            weight_points: 48,
        }
    }
}

fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub r: f64,
    pub sigma: f64,
    pub eps0: f64,
    /// Supremum of admissible `eps` found by bisection (`eps0 = 0.9 * eps_sup`).
    pub eps_sup: f64,
    #[serde(rename = "A1")]
    pub a1_minor: f64,
    #[serde(rename = "A2")]
    pub a2_minor: f64,
    pub eigenvalues: [f64; 3],
    pub coefficients: Coefficients,
}

impl Witness {
    pub fn coefficients_at(&self, eps: f64) -> Coefficients {
        coefficients(self.p, self.r, self.sigma, self.alpha, self.beta, eps)
    }

    /// Recomputes the minors and eigenvalues at `eps0` from the stored
    /// parameters.
    pub fn recheck(&self) -> bool {
        let c = self.coefficients_at(self.eps0);
        let (m1, m2) = minors(&c);
        let tol = 1e-12 * c.scale();
        m1 > 0.0 && m2 < 0.0 && c.eigenvalues().iter().all(|&e| e < -tol)
    }
}

/// `-lambda_max / max|a_i|`: positive exactly when the form is negative
/// definite.
fn definiteness_margin(c: &Coefficients) -> f64 {
    let scale = c.scale();
    if scale == 0.0 {
        return f64::NEG_INFINITY;
    }
    -c.eigenvalues()[2] / scale
}

pub fn find_witness(n: u32, alpha: f64, beta: f64) -> Result<Witness, CertifyError> {
    find_witness_in(n, alpha, beta, &SearchBox::default())
}

pub fn find_witness_in(
    n: u32,
    alpha: f64,
    beta: f64,
    search: &SearchBox,
) -> Result<Witness, CertifyError> {
    let cert = certify(n, alpha, beta)?;
    if !cert.feasible {
        return Err(CertifyError::Infeasible {
            alpha,
            threshold: cert.threshold_star,
        });
    }
    let half_n = n as f64 / 2.0;
    let p_offsets = log_space(search.p_offset_min, search.p_offset_max, search.p_points);
    let weights = log_space(search.weight_min, search.weight_max, search.weight_points);

    // Grid points are visited in lexicographic (p, r, sigma) order and only a
    // strictly larger margin replaces the incumbent.
    let mut best: Option<(f64, [f64; 3])> = None;
    let mut best_any = f64::NEG_INFINITY;
    for &dp in &p_offsets {
        let p = half_n + dp;
        for &r in &weights {
            for &sigma in &weights {
                let c = coefficients(p, r, sigma, alpha, beta, 0.0);
                let margin = definiteness_margin(&c);
                best_any = best_any.max(margin);
                let (m1, m2) = minors(&c);
                if m1 > 0.0 && m2 < 0.0 && best.map_or(true, |(m, _)| margin > m) {
                    best = Some((margin, [p, r, sigma]));
                }
            }
        }
    }
    let Some((_, start)) = best else {
        return Err(CertifyError::NotFound {
            best_margin: best_any,
            search: search.clone(),
        });
    };

    let [p, r, sigma] = refine(half_n, start, alpha, beta, search);
    let ok = |eps: f64| {
        let (m1, m2) = minors(&coefficients(p, r, sigma, alpha, beta, eps));
        m1 > 0.0 && m2 < 0.0
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut iters = 0;
    while (hi - lo > 1e-6 || lo == 0.0) && iters < 200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    let eps0 = 0.9 * lo;
    let c = coefficients(p, r, sigma, alpha, beta, eps0);
    let (m1, m2) = minors(&c);
    let eigenvalues = c.eigenvalues();
    let tol = 1e-12 * c.scale();
    if !(eps0 > 0.0 && eps0 < 1.0 && m1 > 0.0 && m2 < 0.0 && eigenvalues.iter().all(|&e| e < -tol)) {
        return Err(CertifyError::WitnessRejected(format!(
            "eps0 = {eps0}, A1 = {m1}, A2 = {m2}, eigenvalues = {eigenvalues:?}"
        )));
    }
    Ok(Witness {
        n,
        alpha,
        beta,
        p,
        r,
        sigma,
        eps0,
        eps_sup: lo,
        a1_minor: m1,
        a2_minor: m2,
        eigenvalues,
        coefficients: c,
    })
}

/// Coordinate ascent of the definiteness margin in
/// `(ln(p - n/2), ln r, ln sigma)`, halving the step until it drops below
/// `1e-8`. Trials leaving the search box are skipped; the margin is scale
/// free and otherwise drifts toward degenerate corners such as `p -> n/2`.
fn refine(half_n: f64, start: [f64; 3], alpha: f64, beta: f64, search: &SearchBox) -> [f64; 3] {
    let lower = [search.p_offset_min.ln(), search.weight_min.ln(), search.weight_min.ln()];
    let upper = [search.p_offset_max.ln(), search.weight_max.ln(), search.weight_max.ln()];
    let to_params = |q: [f64; 3]| [half_n + q[0].exp(), q[1].exp(), q[2].exp()];
    let score = |q: [f64; 3]| {
        let [p, r, s] = to_params(q);
        let c = coefficients(p, r, s, alpha, beta, 0.0);
        if sylvester_negative_definite(&c) {
            definiteness_margin(&c)
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut q = [(start[0] - half_n).ln(), start[1].ln(), start[2].ln()];
    let mut current = score(q);
    let mut step = 0.25;
    while step > 1e-8 {
        let mut improved = false;
        for axis in 0..3 {
            for dir in [1.0, -1.0] {
                let mut trial = q;
                trial[axis] += dir * step;
                if trial[axis] < lower[axis] || trial[axis] > upper[axis] {
                    continue;
                }
                let s = score(trial);
                if s > current {
                    q = trial;
                    current = s;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    to_params(q)
}
