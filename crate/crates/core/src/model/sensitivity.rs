//! Signal-dependent sensitivity functions (the chemotactic coefficients
//! of the attractant and the repellent) and checks of the structural
//! hypotheses the boundedness theory places on them:
//!
//! * positivity and integrability of the tail on `(eta, inf)`,
//! * a product bound `s * chi(s) <= chi_0`,
//! * the Riccati-type inequality `chi'(s) + alpha * chi(s)^2 <= 0`.
//!
//! The built-in power family `chat * (1 + s)^(-k)` has closed forms for
//! everything; tabulated families are interpolated with a monotone cubic
//! and extended past the last node by a fitted power law.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Number of points of the geometric sample used by hypothesis checks.
pub const HYPOTHESIS_SAMPLES: usize = 512;
/// Span of the hypothesis sample past the floor.
pub const HYPOTHESIS_SPAN: f64 = 1e6;
/// Inflation applied to the sampled supremum of `s * chi(s)`.
pub const C_BOUND_INFLATION: f64 = 1.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `chat * (1 + s)^(-k)`.
    Power { chat: f64, k: f64 },
    /// `chi(s) = value` for every `s`; used for exploratory runs only.
    Constant { value: f64 },
    Tabulated(Table),
}

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant through positive
/// samples, continued past the last node by `y_N ((1+s)/(1+s_N))^(-q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TablePoints", try_from = "TablePoints")]
pub struct Table {
    s: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
    tail_exponent: f64,
}

/// Serialized form of a [`Table`]: its nodes only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TablePoints {
    pub points: Vec<(f64, f64)>,
}

impl From<Table> for TablePoints {
    fn from(t: Table) -> Self {
        Self {
            points: t.points().collect(),
        }
    }
}

impl TryFrom<TablePoints> for Table {
    type Error = ModelError;

    fn try_from(p: TablePoints) -> Result<Self, Self::Error> {
        Table::new(&p.points)
    }
}

impl Table {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, ModelError> {
        if points.len() < 2 {
            return Err(ModelError::InvalidSensitivity(
                "a table needs at least two points".into(),
            ));
        }
        let s: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        if s[0] < 0.0 || s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ModelError::InvalidSensitivity(
                "table abscissae must be nonnegative and strictly increasing".into(),
            ));
        }
        if y.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(ModelError::InvalidSensitivity(
                "table values must be finite and positive".into(),
            ));
        }
        let n = s.len();
        let tail_exponent = -(y[n - 1] / y[n - 2]).ln() / ((1.0 + s[n - 1]) / (1.0 + s[n - 2])).ln();
        let mut table = Self {
            s,
            y,
            slopes: Vec::new(),
            cumulative: Vec::new(),
            tail_exponent,
        };
        table.prepare();
        Ok(table)
    }

    fn prepare(&mut self) {
        let n = self.s.len();
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (self.y[i + 1] - self.y[i]) / (self.s[i + 1] - self.s[i]))
            .collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = secant[0];
            d[1] = secant[0];
        } else {
            for i in 1..n - 1 {
                let (a, b) = (secant[i - 1], secant[i]);
                if a * b > 0.0 {
                    let h0 = self.s[i] - self.s[i - 1];
                    let h1 = self.s[i + 1] - self.s[i];
                    let w1 = 2.0 * h1 + h0;
                    let w2 = h1 + 2.0 * h0;
                    d[i] = (w1 + w2) / (w1 / a + w2 / b);
                }
            }
            d[0] = end_slope(self.s[1] - self.s[0], self.s[2] - self.s[1], secant[0], secant[1]);
            d[n - 1] = end_slope(
                self.s[n - 1] - self.s[n - 2],
                self.s[n - 2] - self.s[n - 3],
                secant[n - 2],
                secant[n - 3],
            );
        }
        self.slopes = d;
        let mut cumulative = vec![0.0; n];
        for i in 0..n - 1 {
            cumulative[i + 1] = cumulative[i] + self.segment_integral(i, 1.0);
        }
        self.cumulative = cumulative;
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s.iter().copied().zip(self.y.iter().copied())
    }

    pub fn first_abscissa(&self) -> f64 {
        self.s[0]
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }

    fn last(&self) -> usize {
        self.s.len() - 1
    }

    fn segment(&self, s: f64) -> usize {
        match self.s.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.last() - 1),
            Err(i) => i.saturating_sub(1).min(self.last() - 1),
        }
    }

    /// Integral of the cubic on segment `i` from its left node to fraction `t`.
    fn segment_integral(&self, i: usize, t: f64) -> f64 {
        let h = self.s[i + 1] - self.s[i];
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let h00 = t4 / 2.0 - t3 + t;
        let h10 = t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0;
        let h01 = -t4 / 2.0 + t3;
        let h11 = t4 / 4.0 - t3 / 3.0;
        h * (self.y[i] * h00
            + h * self.slopes[i] * h10
            + self.y[i + 1] * h01
            + h * self.slopes[i + 1] * h11)
    }

    fn value_and_slope(&self, s: f64) -> (f64, f64) {
        let n = self.last();
        if s >= self.s[n] {
            let ratio = (1.0 + s) / (1.0 + self.s[n]);
            let v = self.y[n] * ratio.powf(-self.tail_exponent);
            return (v, -self.tail_exponent * v / (1.0 + s));
        }
        let i = self.segment(s);
        let h = self.s[i + 1] - self.s[i];
        let t = (s - self.s[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let value = self.y[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * self.slopes[i] * (t3 - 2.0 * t2 + t)
            + self.y[i + 1] * (-2.0 * t3 + 3.0 * t2)
            + h * self.slopes[i + 1] * (t3 - t2);
        let slope = self.y[i] * (6.0 * t2 - 6.0 * t) / h
            + self.slopes[i] * (3.0 * t2 - 4.0 * t + 1.0)
            + self.y[i + 1] * (-6.0 * t2 + 6.0 * t) / h
            + self.slopes[i + 1] * (3.0 * t2 - 2.0 * t);
        (value, slope)
    }

    /// `int_{s_0}^{s}` of the interpolant (with the power-law extension).
    fn primitive(&self, s: f64) -> f64 {
        let n = self.last();
        if s >= self.s[n] {
            let base = self.cumulative[n];
            let q = self.tail_exponent;
            let a = 1.0 + self.s[n];
            let b = 1.0 + s;
            let ext = if (q - 1.0).abs() < 1e-12 {
                self.y[n] * a * (b / a).ln()
            } else {
                self.y[n] * a / (1.0 - q) * ((b / a).powf(1.0 - q) - 1.0)
            };
            return base + ext;
        }
        let i = self.segment(s);
        let t = (s - self.s[i]) / (self.s[i + 1] - self.s[i]);
        self.cumulative[i] + self.segment_integral(i, t)
    }

    fn total_integral(&self) -> Option<f64> {
        let n = self.last();
        let q = self.tail_exponent;
        (q > 1.0).then(|| self.cumulative[n] + self.y[n] * (1.0 + self.s[n]) / (q - 1.0))
    }
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d * m0 <= 0.0 {
        0.0
    } else if m0 * m1 <= 0.0 && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Value, derivative and tail integral `int_s^inf chi` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityEval {
    pub value: f64,
    pub derivative: f64,
    pub tail: f64,
}

/// A sensitivity function together with its admissible domain
/// `[eta_floor, inf)` and the hypothesis constants attached to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySpec {
    pub family: Family,
    pub eta_floor: f64,
    /// Riccati constant (`alpha` for the attractant, `beta` for the repellent).
    pub alpha_like: Option<f64>,
    /// Product bound (`chi_0` or `xi_0`), filled in by validation.
    pub c_bound: Option<f64>,
    /// Hoelder exponent of the derivative; metadata only.
    pub holder_exponent: Option<f64>,
}

impl SensitivitySpec {
    pub fn power(chat: f64, k: f64) -> Result<Self, ModelError> {
        if !(chat.is_finite() && chat > 0.0) {
            return Err(ModelError::InvalidSensitivity(format!(
                "amplitude must be positive, got {chat}"
            )));
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(ModelError::InvalidSensitivity(format!(
                "decay exponent must be finite and nonnegative, got {k}"
            )));
        }
        Ok(Self::from_family(Family::Power { chat, k }, 0.0))
    }

    pub fn constant(value: f64) -> Result<Self, ModelError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(ModelError::InvalidSensitivity(format!(
                "constant sensitivity must be positive, got {value}"
            )));
        }
        Ok(Self::from_family(Family::Constant { value }, 0.0))
    }

    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self, ModelError> {
        let table = Table::new(points)?;
        let floor = table.first_abscissa();
        Ok(Self::from_family(Family::Tabulated(table), floor))
    }

    fn from_family(family: Family, eta_floor: f64) -> Self {
        Self {
            family,
            eta_floor,
            alpha_like: None,
            c_bound: None,
            holder_exponent: None,
        }
    }

    /// Moves the left end of the admissible domain.
    pub fn with_eta_floor(mut self, eta: f64) -> Result<Self, ModelError> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(ModelError::InvalidSensitivity(format!(
                "eta floor must be finite and nonnegative, got {eta}"
            )));
        }
        if let Family::Tabulated(t) = &self.family {
            if eta < t.first_abscissa() {
                return Err(ModelError::InvalidSensitivity(format!(
                    "table starts at {} and cannot serve floor {eta}",
                    t.first_abscissa()
                )));
            }
        }
        self.eta_floor = eta;
        Ok(self)
    }

    pub fn with_alpha_like(mut self, alpha: f64) -> Self {
        self.alpha_like = Some(alpha);
        self
    }

    pub fn with_holder_exponent(mut self, theta: f64) -> Self {
        self.holder_exponent = Some(theta);
        self
    }

    fn check_domain(&self, s: f64) -> Result<(), ModelError> {
        if s < self.eta_floor || s.is_nan() {
            Err(ModelError::Domain {
                s,
                floor: self.eta_floor,
            })
        } else {
            Ok(())
        }
    }

    fn raw_value(&self, s: f64) -> f64 {
        match &self.family {
            Family::Power { chat, k } => chat * (1.0 + s).powf(-k),
            Family::Constant { value } => *value,
            Family::Tabulated(t) => t.value_and_slope(s).0,
        }
    }

    fn raw_derivative(&self, s: f64) -> f64 {
        match &self.family {
            Family::Power { chat, k } => -k * chat * (1.0 + s).powf(-k - 1.0),
            Family::Constant { .. } => 0.0,
            Family::Tabulated(t) => t.value_and_slope(s).1,
        }
    }

    pub fn value(&self, s: f64) -> Result<f64, ModelError> {
        self.check_domain(s)?;
        Ok(self.raw_value(s))
    }

    pub fn derivative(&self, s: f64) -> Result<f64, ModelError> {
        self.check_domain(s)?;
        Ok(self.raw_derivative(s))
    }

    /// Value at `max(s, eta_floor)`; the flag reports whether clamping
    /// happened so callers can count it.
    #[inline]
    pub fn value_clamped(&self, s: f64) -> (f64, bool) {
        if s < self.eta_floor {
            (self.raw_value(self.eta_floor), true)
        } else {
            (self.raw_value(s), false)
        }
    }

    /// `int_s^inf` of the sensitivity.
    pub fn tail(&self, s: f64) -> Result<f64, ModelError> {
        self.check_domain(s)?;
        match &self.family {
            Family::Power { chat, k } => {
                if *k <= 1.0 {
                    Err(ModelError::DivergentTail(format!(
                        "power family with k = {k} <= 1 is not integrable"
                    )))
                } else {
                    Ok(chat * (1.0 + s).powf(1.0 - k) / (k - 1.0))
                }
            }
            Family::Constant { .. } => Err(ModelError::DivergentTail(
                "a positive constant is not integrable on a half-line".into(),
            )),
            Family::Tabulated(t) => match t.total_integral() {
                Some(total) => Ok((total - t.primitive(s)).max(0.0)),
                None => Err(ModelError::DivergentTail(format!(
                    "tabulated tail decays like (1+s)^-{:.4}, which is not integrable",
                    t.tail_exponent()
                ))),
            },
        }
    }

    /// `int_{eta_floor}^{s}` of the sensitivity, with `s` clamped to the
    /// floor from below (so the result is never negative).
    pub fn integral_from_floor(&self, s: f64) -> f64 {
        let eta = self.eta_floor;
        let s = s.max(eta);
        match &self.family {
            Family::Power { chat, k } => {
                if (k - 1.0).abs() < 1e-14 {
                    chat * ((1.0 + s) / (1.0 + eta)).ln()
                } else {
                    chat * ((1.0 + eta).powf(1.0 - k) - (1.0 + s).powf(1.0 - k)) / (k - 1.0)
                }
            }
            Family::Constant { value } => value * (s - eta),
            Family::Tabulated(t) => t.primitive(s) - t.primitive(eta),
        }
    }

    pub fn eval(&self, s: f64) -> Result<SensitivityEval, ModelError> {
        self.check_domain(s)?;
        Ok(SensitivityEval {
            value: self.raw_value(s),
            derivative: self.raw_derivative(s),
            tail: self.tail(s)?,
        })
    }

    /// Largest `alpha` with `chi' + alpha chi^2 <= 0` on `[eta_floor, inf)`.
    ///
    /// For the power family the inequality reads `alpha * chat <= k (1+s)^(k-1)`,
    /// which is tightest at the floor.
    pub fn max_alpha(&self) -> Result<f64, ModelError> {
        match &self.family {
            Family::Power { chat, k } if *k >= 1.0 => {
                Ok(k * (1.0 + self.eta_floor).powf(k - 1.0) / chat)
            }
            Family::Power { k, .. } => Err(ModelError::Unsupported(format!(
                "max_alpha needs k >= 1, got {k}"
            ))),
            Family::Constant { .. } => Ok(0.0),
            Family::Tabulated(_) => Err(ModelError::Unsupported(
                "max_alpha has no closed form for tabulated families; use validate_hypotheses".into(),
            )),
        }
    }

    /// Points where the hypotheses are sampled: the floor itself followed
    /// by a geometric progression of offsets up to `HYPOTHESIS_SPAN`.
    pub fn hypothesis_sample(&self) -> Vec<f64> {
        let eta = self.eta_floor;
        let mut out = Vec::with_capacity(HYPOTHESIS_SAMPLES + 1);
        out.push(eta);
        let (lo, hi) = (-6.0f64, HYPOTHESIS_SPAN.log10());
        let m = HYPOTHESIS_SAMPLES - 1;
        for i in 0..m {
            let e = lo + (hi - lo) * i as f64 / (m - 1) as f64;
            out.push(eta + 10f64.powf(e));
        }
        if let Family::Power { k, .. } = self.family {
            // Maximiser of s (1+s)^-k.
            if k > 1.0 {
                let s_star = 1.0 / (k - 1.0);
                if s_star > eta {
                    out.push(s_star);
                }
            }
        }
        out
    }

    /// Checks positivity, tail integrability, the product bound and the
    /// Riccati inequality for the given constant. Failures are report
    /// entries, never errors.
    pub fn validate_hypotheses(&self, alpha_like: f64) -> HypothesisReport {
        let sample = self.hypothesis_sample();
        let mut checks = Vec::with_capacity(5);

        let nonpositive = sample
            .iter()
            .copied()
            .find(|&s| !(self.raw_value(s) > 0.0 && self.raw_value(s).is_finite()));
        checks.push(HypothesisCheck {
            hypothesis: Hypothesis::Positivity,
            status: status_from(nonpositive.is_none()),
            worst_s: nonpositive,
            detail: match nonpositive {
                None => "value > 0 at every sample".into(),
                Some(s) => format!("value {} at s = {s}", self.raw_value(s)),
            },
        });

        let tail = self.tail(self.eta_floor);
        checks.push(HypothesisCheck {
            hypothesis: Hypothesis::IntegrableTail,
            status: status_from(tail.is_ok()),
            worst_s: None,
            detail: match &tail {
                Ok(t) => format!("tail integral from floor = {t}"),
                Err(e) => e.to_string(),
            },
        });

        let (sup_s, sup_product) = sample
            .iter()
            .map(|&s| (s, s * self.raw_value(s)))
            .fold((self.eta_floor, f64::NEG_INFINITY), |acc, x| {
                if x.1 > acc.1 {
                    x
                } else {
                    acc
                }
            });
        let bounded = match &self.family {
            Family::Power { k, .. } => *k >= 1.0,
            Family::Constant { .. } => false,
            Family::Tabulated(t) => t.tail_exponent() >= 1.0,
        };
        let c_bound = bounded.then(|| sup_product.max(0.0) * C_BOUND_INFLATION);
        checks.push(HypothesisCheck {
            hypothesis: Hypothesis::ProductBound,
            status: status_from(bounded),
            worst_s: Some(sup_s),
            detail: if bounded {
                format!("sup s*chi(s) = {sup_product} at s = {sup_s}")
            } else {
                "s*chi(s) grows without bound".into()
            },
        });

        let mut riccati_fail: Option<(f64, f64)> = None;
        if alpha_like > 0.0 {
            for &s in &sample {
                let v = self.raw_value(s);
                let d = self.raw_derivative(s);
                let lhs = d + alpha_like * v * v;
                let slack = 1e-12 * (d.abs() + alpha_like * v * v);
                if lhs > slack && riccati_fail.map_or(true, |(_, worst)| lhs > worst) {
                    riccati_fail = Some((s, lhs));
                }
            }
        }
        checks.push(HypothesisCheck {
            hypothesis: Hypothesis::Riccati,
            status: status_from(alpha_like > 0.0 && riccati_fail.is_none()),
            worst_s: riccati_fail.map(|x| x.0),
            detail: if alpha_like <= 0.0 {
                format!("constant must be positive, got {alpha_like}")
            } else {
                match riccati_fail {
                    None => format!("chi' + {alpha_like} chi^2 <= 0 at every sample"),
                    Some((s, lhs)) => format!("chi' + {alpha_like} chi^2 = {lhs} > 0 at s = {s}"),
                }
            },
        });

        checks.push(HypothesisCheck {
            hypothesis: Hypothesis::HolderRegularity,
            status: HypothesisStatus::NotChecked,
            worst_s: None,
            detail: match self.holder_exponent {
                Some(theta) => format!("recorded exponent {theta}; not verifiable by sampling"),
                None => "not verifiable by sampling".into(),
            },
        });

        HypothesisReport {
            alpha_like,
            eta_floor: self.eta_floor,
            c_bound,
            checks,
        }
    }
}

fn status_from(ok: bool) -> HypothesisStatus {
    if ok {
        HypothesisStatus::Pass
    } else {
        HypothesisStatus::Fail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Positivity,
    IntegrableTail,
    ProductBound,
    Riccati,
    HolderRegularity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Pass,
    Fail,
    NotChecked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub status: HypothesisStatus,
    pub worst_s: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub alpha_like: f64,
    pub eta_floor: f64,
    pub c_bound: Option<f64>,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    /// True when no checked hypothesis failed.
    pub fn all_pass(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.status != HypothesisStatus::Fail)
    }

    pub fn status(&self, h: Hypothesis) -> HypothesisStatus {
        self.checks
            .iter()
            .find(|c| c.hypothesis == h)
            .map(|c| c.status)
            .unwrap_or(HypothesisStatus::NotChecked)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks
            .iter()
            .filter(|c| c.status == HypothesisStatus::Fail)
    }
}
