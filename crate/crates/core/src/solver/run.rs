use serde::{Deserialize, Serialize};

use super::scheme::{dt_stable, step_with_dt, SchemeConfig, StepReport, TimeStep};
use super::SolverError;
use crate::diagnostics::{DiagnosticsRecord, Monitor, RecordExtras};
use crate::model::{Grid, SensitivitySpec, SystemState};

/// Auto steps shorter than this fraction of `t_end` (or of 1 when
/// `t_end < 1`) count as a collapse of the time step.
pub const DT_COLLAPSE_FRACTION: f64 = 1e-12;

/// A fully resolved simulation.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub grid: Grid,
    pub initial: SystemState,
    pub scheme: SchemeConfig,
    pub chi: SensitivitySpec,
    pub xi: SensitivitySpec,
    /// Spacing of diagnostics samples in time.
    pub output_interval: f64,
    pub monitor: Monitor,
    /// Hard cap on the number of steps; `None` for no cap.
    pub max_steps: Option<usize>,
}

/// Callbacks invoked by [`run`].
pub trait Observer {
    /// Called at `t = 0`, at every output time and at termination.
    fn on_output(
        &mut self,
        _state: &SystemState,
        _record: &DiagnosticsRecord,
        _extras: &RecordExtras,
    ) -> Result<(), SolverError> {
        Ok(())
    }

    /// Called after every accepted step.
    fn on_step(&mut self, _state: &SystemState, _report: &StepReport) {}
}

impl Observer for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    SuspectedBlowup,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub mass_initial: f64,
    pub mass_final: f64,
    /// Largest `|mass_drift|` of a single step.
    pub max_step_mass_drift: f64,
    /// Largest `positivity_violation / max(1, u_max)` of a single step.
    pub worst_positivity_ratio: f64,
    pub linear_iters: usize,
    pub clamped_evaluations: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl RunStats {
    pub fn relative_mass_drift(&self) -> f64 {
        if self.mass_initial == 0.0 {
            self.mass_final - self.mass_initial
        } else {
            (self.mass_final - self.mass_initial) / self.mass_initial
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: RunStatus,
    pub blowup_reason: Option<String>,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SystemState,
    pub stats: RunStats,
}

/// Advances from the initial state to `t_end`, sampling diagnostics every
/// `output_interval`. Stops early with [`RunStatus::SuspectedBlowup`] when
/// `max u` exceeds the monitor's cap, a field turns non-finite, or the
/// adaptive step collapses.
pub fn run<O: Observer + ?Sized>(setup: &RunSetup, observer: &mut O) -> Result<RunResult, SolverError> {
    setup.scheme.validate()?;
    if !(setup.output_interval.is_finite() && setup.output_interval > 0.0) {
        return Err(SolverError::InvalidScheme(format!(
            "output interval must be positive, got {}",
            setup.output_interval
        )));
    }
    let grid = &setup.grid;
    let t_end = setup.scheme.t_end;
    let mut state = setup.initial.clone();
    state.t = 0.0;
    let mut records = Vec::new();
    let mut stats = RunStats {
        mass_initial: state.mass(grid),
        dt_min: f64::INFINITY,
        ..RunStats::default()
    };

    let emit = |state: &SystemState, records: &mut Vec<DiagnosticsRecord>, observer: &mut O| {
        let (record, extras) = setup.monitor.record_with_extras(state, grid);
        observer.on_output(state, &record, &extras)?;
        let blowup = record.blowup;
        records.push(record);
        Ok::<bool, SolverError>(blowup)
    };

    let finish = |status, reason: Option<String>, state: SystemState, records, mut stats: RunStats| {
        stats.mass_final = state.mass(grid);
        if stats.dt_min == f64::INFINITY {
            stats.dt_min = 0.0;
        }
        Ok(RunResult {
            status,
            blowup_reason: reason,
            records,
            final_state: state,
            stats,
        })
    };

    if emit(&state, &mut records, observer)? {
        let reason = Some("initial data exceed the blow-up cap or are non-finite".to_string());
        return finish(RunStatus::SuspectedBlowup, reason, state, records, stats);
    }

    let collapse = DT_COLLAPSE_FRACTION * t_end.max(1.0);
    let mut output_index: u64 = 1;
    while state.t < t_end {
        let next_output = (output_index as f64 * setup.output_interval).min(t_end);
        let nominal = match setup.scheme.dt {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Auto => dt_stable(&state, grid, &setup.scheme, &setup.chi, &setup.xi),
        };
        if nominal.is_nan() {
            let reason = Some(format!("non-finite signal gradients at t = {}", state.t));
            emit(&state, &mut records, observer)?;
            return finish(RunStatus::SuspectedBlowup, reason, state, records, stats);
        }
        if matches!(setup.scheme.dt, TimeStep::Auto) && nominal < collapse {
            let reason = Some(format!(
                "adaptive step collapsed to {nominal:.3e} at t = {}",
                state.t
            ));
            emit(&state, &mut records, observer)?;
            return finish(RunStatus::SuspectedBlowup, reason, state, records, stats);
        }
        if let Some(cap) = setup.max_steps {
            if stats.steps >= cap {
                return Err(SolverError::StepLimit { steps: cap, t: state.t });
            }
        }

        let remaining = next_output - state.t;
        // Land exactly on output times instead of leaving a sliver step.
        let (dt, lands) = if nominal >= remaining * (1.0 - 1e-12) {
            (remaining, true)
        } else {
            (nominal, false)
        };
        let (mut next, report) = step_with_dt(&state, grid, &setup.scheme, &setup.chi, &setup.xi, dt)?;
        if lands {
            next.t = next_output;
        }
        stats.steps += 1;
        stats.linear_iters += report.linear_iters;
        stats.clamped_evaluations += report.clamped_evaluations;
        stats.dt_min = stats.dt_min.min(dt);
        stats.dt_max = stats.dt_max.max(dt);
        if report.mass_drift.is_finite() {
            stats.max_step_mass_drift = stats.max_step_mass_drift.max(report.mass_drift.abs());
        }
        let ratio = report.positivity_violation / report.u_max.max(1.0);
        if ratio.is_finite() {
            stats.worst_positivity_ratio = stats.worst_positivity_ratio.max(ratio);
        }
        observer.on_step(&next, &report);
        state = next;

        if crate::diagnostics::blowup_check(&state, setup.monitor.blowup_cap) {
            let reason = if state.is_finite() {
                format!("max u exceeded the cap {:.3e} at t = {}", setup.monitor.blowup_cap, state.t)
            } else {
                format!("non-finite field values at t = {}", state.t)
            };
            emit(&state, &mut records, observer)?;
            return finish(RunStatus::SuspectedBlowup, Some(reason), state, records, stats);
        }
        if lands {
            emit(&state, &mut records, observer)?;
            output_index += 1;
        }
    }
    finish(RunStatus::Completed, None, state, records, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::coefficients;

    fn setup(t_end: f64) -> RunSetup {
        let grid = Grid::new_2d([1.0, 1.0], [12, 12]).unwrap();
        let u = grid.sample(|c| 1.0 + 5.0 * (-30.0 * ((c[0] - 0.3).powi(2) + (c[1] - 0.4).powi(2))).exp());
        let initial = SystemState::new(&grid, u, vec![1.0; 144], vec![1.0; 144]).unwrap();
        let chi = SensitivitySpec::power(1.0, 2.0).unwrap();
        RunSetup {
            grid,
            initial,
            scheme: SchemeConfig {
                t_end,
                dt_max: 0.01,
                ..SchemeConfig::default()
            },
            chi: chi.clone(),
            xi: chi.clone(),
            output_interval: 0.05,
            monitor: Monitor {
                chi: chi.clone(),
                xi: chi,
                p: 1.5,
                r: 0.1,
                sigma: 0.1,
                coefficients: coefficients(1.5, 0.1, 0.1, 20.0, 4.0, 0.0),
                u_floor: 1e-12,
                blowup_cap: 1e6,
            },
            max_steps: None,
        }
    }

    #[test]
    fn zero_horizon_yields_single_record() {
        let r = run(&setup(0.0), &mut ()).unwrap();
        assert_eq!(r.status, RunStatus::Completed);
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.stats.steps, 0);
    }

    #[test]
    fn outputs_land_on_interval_multiples() {
        let r = run(&setup(0.2), &mut ()).unwrap();
        let times: Vec<f64> = r.records.iter().map(|x| x.t).collect();
        assert_eq!(times.len(), 5);
        for (k, t) in times.iter().enumerate() {
            assert!((t - 0.05 * k as f64).abs() < 1e-12, "{times:?}");
        }
        assert!(r.stats.relative_mass_drift().abs() < 1e-12);
    }

    #[test]
    fn low_cap_triggers_suspected_blowup() {
        let mut s = setup(1.0);
        s.monitor.blowup_cap = 5.5;
        s.chi = SensitivitySpec::constant(40.0).unwrap();
        let r = run(&s, &mut ()).unwrap();
        assert_eq!(r.status, RunStatus::SuspectedBlowup);
        assert!(r.records.last().unwrap().blowup);
        assert!(r.blowup_reason.unwrap().contains("cap"));
    }

    #[test]
    fn step_cap_is_an_error() {
        let mut s = setup(1.0);
        s.max_steps = Some(3);
        assert!(matches!(run(&s, &mut ()), Err(SolverError::StepLimit { .. })));
    }

    struct Counter(usize, usize);
    impl Observer for Counter {
        fn on_output(&mut self, _: &SystemState, _: &DiagnosticsRecord, _: &RecordExtras) -> Result<(), SolverError> {
            self.0 += 1;
            Ok(())
        }
        fn on_step(&mut self, _: &SystemState, _: &StepReport) {
            self.1 += 1;
        }
    }

    #[test]
    fn observer_sees_every_output_and_step() {
        let mut c = Counter(0, 0);
        let r = run(&setup(0.1), &mut c).unwrap();
        assert_eq!(c.0, r.records.len());
        assert_eq!(c.1, r.stats.steps);
    }
}
