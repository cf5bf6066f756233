use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, DiagnosticsRecord};
use crate::certifier::{AuxConstants, Coefficients};
use crate::model::SystemState;

/// Slack granted to each bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsTolerance {
    pub v: f64,
    pub w: f64,
    pub f: f64,
}

impl BoundsTolerance {
    /// `0.05 * eta` for the signal floors; `1e-12` for the weight bounds.
    pub fn for_aux(aux: &AuxConstants) -> Self {
        Self {
            v: 0.05 * aux.eta1,
            w: 0.05 * aux.eta2,
            f: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    AttractantFloor,
    RepellentFloor,
    WeightLower,
    WeightUpper,
    GradientForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub kind: BoundKind,
    pub observed: f64,
    pub bound: f64,
}

pub fn bounds_check(
    record: &DiagnosticsRecord,
    aux: &AuxConstants,
    tol: &BoundsTolerance,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut flag = |kind, observed: f64, bound: f64, below: bool| {
        let bad = if below { observed < bound } else { observed > bound };
        if bad || observed.is_nan() {
            out.push(Violation {
                t: record.t,
                kind,
                observed,
                bound,
            });
        }
    };
    flag(BoundKind::AttractantFloor, record.min_v, aux.eta1 - tol.v, true);
    flag(BoundKind::RepellentFloor, record.min_w, aux.eta2 - tol.w, true);
    if let Some(c4) = aux.c4 {
        flag(BoundKind::WeightLower, record.f_min, c4 - tol.f, true);
    }
    flag(BoundKind::WeightUpper, record.f_max, 1.0 + 1e-12, false);
    out
}

/// Relative slack for the gradient form: `Q_max <= FORM_TOL * scale`.
pub const FORM_TOL: f64 = 1e-9;

/// Flags a positive gradient-form maximum beyond round-off.
pub fn form_check(record: &DiagnosticsRecord, coeffs: &Coefficients) -> Option<Violation> {
    let bound = FORM_TOL * coeffs.scale();
    (record.q_max > bound || record.q_max.is_nan()).then(|| Violation {
        t: record.t,
        kind: BoundKind::GradientForm,
        observed: record.q_max,
        bound,
    })
}

/// True when `max |u| > cap` (strictly) or any field holds a non-finite value.
pub fn blowup_check(state: &SystemState, cap: f64) -> bool {
    if !state.is_finite() {
        return true;
    }
    state.u.iter().any(|u| u.abs() > cap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub samples: usize,
    pub max_energy: f64,
    pub final_over_max: f64,
    /// Relative spread `(max - min) / max` over the last quarter of samples.
    pub tail_variation: f64,
    pub plateau: bool,
    pub theta: f64,
}

/// Fraction of the series examined for the plateau test.
pub const PLATEAU_FRACTION: f64 = 0.25;
/// Relative spread below which the tail counts as a plateau.
pub const PLATEAU_TOL: f64 = 0.01;

/// Summarises a weighted-energy time series: its maximum, the final/max
/// ratio and whether the last quarter of samples is flat to 1%.
pub fn energy_monitor(series: &[(f64, f64)], theta: f64) -> Result<MonitorReport, DiagnosticsError> {
    if series.len() < 3 {
        return Err(DiagnosticsError::InsufficientSamples(series.len()));
    }
    let max_energy = series.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let last = series.last().unwrap().1;
    let tail_len = ((series.len() as f64 * PLATEAU_FRACTION).ceil() as usize).max(2);
    let tail = &series[series.len() - tail_len..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.1), hi.max(s.1)));
    let scale = hi.abs().max(lo.abs());
    let tail_variation = if scale == 0.0 { 0.0 } else { (hi - lo) / scale };
    Ok(MonitorReport {
        samples: series.len(),
        max_energy,
        final_over_max: if max_energy == 0.0 { 1.0 } else { last / max_energy },
        tail_variation,
        plateau: tail_variation < PLATEAU_TOL,
        theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::C0Source;
    use crate::model::Grid;

    fn aux() -> AuxConstants {
        AuxConstants {
            eta1: 1.0,
            eta2: 2.0,
            c0: 0.3,
            c0_source: C0Source::Override,
            c4: Some(0.5),
            theta: 0.5,
        }
    }

    fn clean_record() -> DiagnosticsRecord {
        DiagnosticsRecord {
            t: 1.0,
            mass_u: 1.0,
            linf_u: 1.0,
            linf_v: 3.0,
            linf_w: 3.0,
            min_v: 1.2,
            min_w: 2.1,
            grad_linf_v: 0.0,
            grad_linf_w: 0.0,
            energy_p: 1.0,
            f_min: 0.6,
            f_max: 1.0,
            q_max: -1.0,
            excluded_cells: 0,
            blowup: false,
        }
    }

    #[test]
    fn bounds_examples() {
        let tol = BoundsTolerance::for_aux(&aux());
        assert!(bounds_check(&clean_record(), &aux(), &tol).is_empty());
        // within the 5% slack
        let slack = DiagnosticsRecord {
            min_v: 0.96,
            ..clean_record()
        };
        assert!(bounds_check(&slack, &aux(), &tol).is_empty());
        let low = DiagnosticsRecord {
            min_v: 0.5,
            f_max: 1.1,
            ..clean_record()
        };
        let v = bounds_check(&low, &aux(), &tol);
        let kinds: Vec<_> = v.iter().map(|x| x.kind).collect();
        assert_eq!(kinds, vec![BoundKind::AttractantFloor, BoundKind::WeightUpper]);

        let trivial = AuxConstants {
            eta1: 0.0,
            eta2: 0.0,
            c4: Some(1.0),
            ..aux()
        };
        let ones = DiagnosticsRecord {
            f_min: 1.0,
            f_max: 1.0,
            min_v: 0.0,
            min_w: 0.0,
            ..clean_record()
        };
        assert!(bounds_check(&ones, &trivial, &BoundsTolerance::for_aux(&trivial)).is_empty());
    }

    #[test]
    fn blowup_examples() {
        let g = Grid::new_1d(1.0, 4).unwrap();
        let mut s = SystemState::uniform(&g, 5.0, 1.0, 1.0).unwrap();
        assert!(!blowup_check(&s, 5.0));
        assert!(blowup_check(&s, 4.999));
        s.w[2] = f64::INFINITY;
        assert!(blowup_check(&s, 1e9));
    }

    #[test]
    fn monitor_examples() {
        let flat: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0)).collect();
        let r = energy_monitor(&flat, 0.5).unwrap();
        assert!(r.plateau);
        assert_eq!(r.max_energy, 2.0);
        assert_eq!(r.final_over_max, 1.0);

        let decay: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, (-(i as f64)).exp())).collect();
        assert!(!energy_monitor(&decay, 0.5).unwrap().plateau);
        let slow: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 1.0 + (-(i as f64)).exp())).collect();
        assert!(energy_monitor(&slow, 0.5).unwrap().plateau);

        assert!(matches!(
            energy_monitor(&flat[..2], 0.5),
            Err(DiagnosticsError::InsufficientSamples(2))
        ));
    }
}
