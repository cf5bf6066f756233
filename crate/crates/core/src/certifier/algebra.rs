//! Admissibility of `(alpha, beta)` for the boundedness theorem.
//!
//! `beta` must exceed `n + sqrt(n/2)`, and `alpha` must exceed a threshold
//! that depends on an auxiliary `delta` taken from the open interval
//!
//! ```text
//! J = (beta - n - sqrt((beta-n)^2 - n/2), beta - n + sqrt((beta-n)^2 - n/2)).
//! ```

use serde::{Deserialize, Serialize};

use super::CertifyError;

/// Uniform grid density used to bracket the minimum of the threshold on `J`.
pub const DELTA_GRID: usize = 2048;
/// Golden-section tolerance on `delta`.
pub const DELTA_TOL: f64 = 1e-10;

fn check_n(n: u32) -> Result<(), CertifyError> {
    if n < 2 {
        Err(CertifyError::InvalidInput(format!(
            "theorem dimension must be >= 2, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// `beta > n + sqrt(n/2)`, strictly.
pub fn beta_feasible(n: u32, beta: f64) -> bool {
    let n = n as f64;
    beta > n + (n / 2.0).sqrt()
}

pub fn interval_j(n: u32, beta: f64) -> Result<(f64, f64), CertifyError> {
    check_n(n)?;
    let nf = n as f64;
    let gap = beta - nf;
    let radicand = gap * gap - nf / 2.0;
    if !beta_feasible(n, beta) || radicand <= 0.0 {
        return Err(CertifyError::BetaInfeasible { n, beta });
    }
    let root = radicand.sqrt();
    Ok((gap - root, gap + root))
}

pub fn discriminant_d(n: u32, beta: f64, delta: f64) -> f64 {
    let n = n as f64;
    let lead = n * delta / 2.0 * (2.0 * beta + (2.0 * n - 1.0) * delta);
    let bracket = 2.0 * delta * (beta - n)
        + n / 2.0 * (2.0 * n * (delta + 1.0).powi(2) - (2.0 * delta + 1.0).powi(2));
    lead * bracket
}

/// Denominator `2 delta (beta - n) - delta^2 - n/2` of the threshold; it is
/// positive exactly on the interior of `J`.
pub fn threshold_denominator(n: u32, beta: f64, delta: f64) -> f64 {
    let n = n as f64;
    2.0 * delta * (beta - n) - delta * delta - n / 2.0
}

/// Right-hand side of the `alpha` condition for a given `delta`.
pub fn alpha_threshold(n: u32, beta: f64, delta: f64) -> Result<f64, CertifyError> {
    let den = threshold_denominator(n, beta, delta);
    if !(den > 0.0) {
        return Err(CertifyError::DenominatorNonpositive { delta, value: den });
    }
    let d = discriminant_d(n, beta, delta);
    if d < 0.0 {
        return Err(CertifyError::NegativeDiscriminant { delta, value: d });
    }
    let nf = n as f64;
    let num = nf / 2.0 * (2.0 * delta + 1.0) * ((nf - 1.0) * delta + nf) + d.sqrt();
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub j_lo: f64,
    pub j_hi: f64,
    pub delta_star: f64,
    pub threshold_star: f64,
    pub feasible: bool,
}

/// Minimises the threshold over `J` (uniform grid, then golden section on
/// the bracket around the best grid point) and compares it with `alpha`.
pub fn certify(n: u32, alpha: f64, beta: f64) -> Result<Certificate, CertifyError> {
    certify_with_grid(n, alpha, beta, DELTA_GRID)
}

pub fn certify_with_grid(
    n: u32,
    alpha: f64,
    beta: f64,
    grid: usize,
) -> Result<Certificate, CertifyError> {
    check_n(n)?;
    if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
        return Err(CertifyError::InvalidInput(format!(
            "alpha and beta must be positive and finite, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let (lo, hi) = interval_j(n, beta)?;
    let width = hi - lo;
    let node = |i: usize| lo + width * i as f64 / (grid + 1) as f64;

    let objective = |delta: f64| -> Result<f64, CertifyError> {
        match alpha_threshold(n, beta, delta) {
            Ok(v) => Ok(v),
            // Rounding right at an endpoint of J.
            Err(CertifyError::DenominatorNonpositive { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let mut best_i = 1;
    let mut best = f64::INFINITY;
    for i in 1..=grid {
        let v = objective(node(i))?;
        if v < best {
            best = v;
            best_i = i;
        }
    }

    let (mut a, mut b) = (node(best_i - 1), node(best_i + 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while b - a > DELTA_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let (mut delta_star, mut threshold_star) = (node(best_i), best);
    for (x, fx) in [(mid, objective(mid)?), (c, fc), (d, fd)] {
        if fx < threshold_star {
            delta_star = x;
            threshold_star = fx;
        }
    }
    debug_assert!(discriminant_d(n, beta, delta_star) >= 0.0);

    Ok(Certificate {
        n,
        alpha,
        beta,
        j_lo: lo,
        j_hi: hi,
        delta_star,
        threshold_star,
        feasible: alpha > threshold_star,
    })
}
