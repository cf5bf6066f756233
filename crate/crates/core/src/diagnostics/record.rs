use serde::{Deserialize, Serialize};

use super::fields::{
    count_below_floor, gradient_magnitude, quadratic_form_max, weight_field, weighted_energy,
    xyz_fields,
};
use super::{blowup_check, DiagnosticsError};
use crate::certifier::Coefficients;
use crate::model::{max_of, min_of, Grid, SensitivitySpec, SystemState};

/// One time sample of the monitored functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_u: f64,
    pub linf_u: f64,
    pub linf_v: f64,
    pub linf_w: f64,
    pub min_v: f64,
    pub min_w: f64,
    pub grad_linf_v: f64,
    pub grad_linf_w: f64,
    pub energy_p: f64,
    pub f_min: f64,
    pub f_max: f64,
    #[serde(rename = "Q_max")]
    pub q_max: f64,
    pub excluded_cells: usize,
    pub blowup: bool,
}

/// Column order of `series.csv`.
pub const SERIES_HEADER: [&str; 15] = [
    "t",
    "mass_u",
    "linf_u",
    "linf_v",
    "linf_w",
    "min_v",
    "min_w",
    "grad_linf_v",
    "grad_linf_w",
    "energy_p",
    "f_min",
    "f_max",
    "Q_max",
    "excluded_cells",
    "blowup",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl DiagnosticsRecord {
    pub fn csv_header() -> String {
        SERIES_HEADER.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        let floats = [
            self.t,
            self.mass_u,
            self.linf_u,
            self.linf_v,
            self.linf_w,
            self.min_v,
            self.min_w,
            self.grad_linf_v,
            self.grad_linf_w,
            self.energy_p,
            self.f_min,
            self.f_max,
            self.q_max,
        ];
        let mut cols: Vec<String> = floats.iter().map(|x| format_float(*x)).collect();
        cols.push(self.excluded_cells.to_string());
        cols.push(self.blowup.to_string());
        cols.join(",")
    }

    pub fn from_csv_row(line: &str) -> Result<Self, DiagnosticsError> {
        let cols: Vec<&str> = line.trim_end().split(',').collect();
        if cols.len() != SERIES_HEADER.len() {
            return Err(DiagnosticsError::MalformedRow(format!(
                "expected {} columns, found {}",
                SERIES_HEADER.len(),
                cols.len()
            )));
        }
        let f = |i: usize| -> Result<f64, DiagnosticsError> {
            cols[i].parse::<f64>().map_err(|e| {
                DiagnosticsError::MalformedRow(format!("column {}: {e}", SERIES_HEADER[i]))
            })
        };
        Ok(Self {
            t: f(0)?,
            mass_u: f(1)?,
            linf_u: f(2)?,
            linf_v: f(3)?,
            linf_w: f(4)?,
            min_v: f(5)?,
            min_w: f(6)?,
            grad_linf_v: f(7)?,
            grad_linf_w: f(8)?,
            energy_p: f(9)?,
            f_min: f(10)?,
            f_max: f(11)?,
            q_max: f(12)?,
            excluded_cells: cols[13].parse().map_err(|e| {
                DiagnosticsError::MalformedRow(format!("column excluded_cells: {e}"))
            })?,
            blowup: cols[14]
                .parse()
                .map_err(|e| DiagnosticsError::MalformedRow(format!("column blowup: {e}")))?,
        })
    }
}

/// Everything needed to turn a state into a [`DiagnosticsRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub chi: SensitivitySpec,
    pub xi: SensitivitySpec,
    pub p: f64,
    pub r: f64,
    pub sigma: f64,
    /// Coefficients of the gradient form (taken at `eps0` for a witness).
    pub coefficients: Coefficients,
    pub u_floor: f64,
    pub blowup_cap: f64,
}

/// Extra per-record counters that are not part of the CSV schema.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordExtras {
    pub below_floor_cells: usize,
}

impl Monitor {
    pub fn record(&self, state: &SystemState, grid: &Grid) -> DiagnosticsRecord {
        self.record_with_extras(state, grid).0
    }

    pub fn record_with_extras(&self, state: &SystemState, grid: &Grid) -> (DiagnosticsRecord, RecordExtras) {
        let f = weight_field(state, &self.chi, &self.xi, self.r, self.sigma);
        let xyz = xyz_fields(state, &self.chi, &self.xi, grid, self.u_floor);
        let abs_max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) });
        let record = DiagnosticsRecord {
            t: state.t,
            mass_u: state.mass(grid),
            linf_u: abs_max(&state.u),
            linf_v: abs_max(&state.v),
            linf_w: abs_max(&state.w),
            min_v: min_of(&state.v),
            min_w: min_of(&state.w),
            grad_linf_v: max_of(&gradient_magnitude(&state.v, grid)),
            grad_linf_w: max_of(&gradient_magnitude(&state.w, grid)),
            energy_p: weighted_energy(&state.u, self.p, &f, grid),
            f_min: min_of(&f),
            f_max: max_of(&f),
            q_max: quadratic_form_max(&self.coefficients, &xyz),
            excluded_cells: xyz.excluded_count(),
            blowup: blowup_check(state, self.blowup_cap),
        };
        let extras = RecordExtras {
            below_floor_cells: count_below_floor(state, &self.chi, &self.xi),
        };
        (record, extras)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::coefficients;

    fn monitor(p: f64) -> Monitor {
        Monitor {
            chi: SensitivitySpec::power(1.0, 2.0).unwrap(),
            xi: SensitivitySpec::power(1.0, 2.0).unwrap(),
            p,
            r: 0.0,
            sigma: 0.0,
            coefficients: coefficients(1.5, 0.1, 0.1, 20.0, 4.0, 0.0),
            u_floor: 1e-12,
            blowup_cap: 1e6,
        }
    }

    #[test]
    fn energy_with_unit_power_and_weight_is_mass() {
        let g = Grid::new_2d([1.0, 2.0], [8, 8]).unwrap();
        let u = g.sample(|c| 1.0 + c[0] * c[1]);
        let s = SystemState::new(&g, u, vec![1.0; 64], vec![1.0; 64]).unwrap();
        let rec = monitor(1.0).record(&s, &g);
        assert_eq!(rec.energy_p, rec.mass_u);
        assert_eq!((rec.f_min, rec.f_max), (1.0, 1.0));
        assert!(!rec.blowup);
    }

    #[test]
    fn csv_row_round_trips() {
        let g = Grid::new_1d(1.0, 8).unwrap();
        let u = g.sample(|c| 0.1 + (7.0 * c[0]).sin().powi(2));
        let v = g.sample(|c| 1.0 / 3.0 + c[0]);
        let s = SystemState::new(&g, u, v.clone(), v).unwrap();
        let rec = monitor(1.7).record(&s, &g);
        let row = rec.to_csv_row();
        assert_eq!(row.split(',').count(), 15);
        assert_eq!(DiagnosticsRecord::from_csv_row(&row).unwrap(), rec);
        assert!(DiagnosticsRecord::from_csv_row("1,2,3").is_err());
        assert_eq!(DiagnosticsRecord::csv_header().split(',').count(), 15);
    }

    #[test]
    fn non_finite_values_survive_csv() {
        let mut rec = monitor(2.0).record(
            &SystemState::uniform(&Grid::new_1d(1.0, 4).unwrap(), 1.0, 1.0, 1.0).unwrap(),
            &Grid::new_1d(1.0, 4).unwrap(),
        );
        rec.linf_u = f64::INFINITY;
        rec.q_max = f64::NAN;
        rec.blowup = true;
        let back = DiagnosticsRecord::from_csv_row(&rec.to_csv_row()).unwrap();
        assert_eq!(back.linf_u, f64::INFINITY);
        assert!(back.q_max.is_nan());
        assert!(back.blowup);
    }
}
