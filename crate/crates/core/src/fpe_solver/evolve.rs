use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::diagnostics::{l1_to_stationary, moments, stationarity_residual};
use super::{Field, SchemeConfig, SolverError, Stepper};
use crate::model::{derive_params, DerivedParams, LatticeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observer {
    Mass,
    SecondMoment,
    /// Needs a normalizable stationary state; recorded as empty otherwise.
    L1ToStationary,
    StationarityResidual,
}

impl Observer {
    pub const ALL: [Observer; 4] = [
        Observer::Mass,
        Observer::SecondMoment,
        Observer::L1ToStationary,
        Observer::StationarityResidual,
    ];
}

/// One row of the trajectory CSV `(t, mass, m2, l1_to_w0, stat_residual)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub mass: Option<f64>,
    pub m2: Option<f64>,
    pub l1_to_w0: Option<f64>,
    pub stat_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    /// Observation interval in time units; `None` records only the start and end.
    pub sample_interval: Option<f64>,
    pub max_steps: usize,
    pub max_wall: Option<Duration>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            sample_interval: None,
            max_steps: 10_000_000,
            max_wall: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub field: Field,
    pub records: Vec<TrajectoryRecord>,
    pub steps: usize,
    pub dt: f64,
    pub elapsed: Duration,
}

struct Recorder<'a> {
    params: &'a LatticeParams,
    stationary: Option<DerivedParams>,
    observers: &'a [Observer],
}

impl Recorder<'_> {
    fn record(&self, field: &Field) -> TrajectoryRecord {
        let wants = |o: Observer| self.observers.contains(&o);
        TrajectoryRecord {
            t: field.t(),
            mass: wants(Observer::Mass).then(|| field.mass()),
            m2: wants(Observer::SecondMoment).then(|| moments(field, &[2])[0].value),
            l1_to_w0: if wants(Observer::L1ToStationary) {
                self.stationary.as_ref().map(|d| l1_to_stationary(field, d))
            } else {
                None
            },
            stat_residual: wants(Observer::StationarityResidual)
                .then(|| stationarity_residual(field, self.params)),
        }
    }
}

/// Steps from `state.t()` to `t_end` with a uniform step `dt' ≤ cfg.dt`
/// chosen so that the last step lands exactly on `t_end`.
pub fn evolve(
    state: Field,
    params: &LatticeParams,
    cfg: &SchemeConfig,
    t_end: f64,
    observers: &[Observer],
    options: &EvolveOptions,
) -> Result<Evolution, SolverError> {
    cfg.validate()?;
    let t0 = state.t();
    if !(t_end >= t0) {
        return Err(SolverError::InvalidScheme(format!(
            "t_end = {t_end} precedes the state time {t0}"
        )));
    }
    let span = t_end - t0;
    let steps = if span == 0.0 {
        0
    } else {
        ((span / cfg.dt) - 1e-9).ceil().max(1.0) as usize
    };
    if steps > options.max_steps {
        return Err(SolverError::BudgetExceeded { steps, t: t0 });
    }
    let dt = if steps == 0 {
        cfg.dt
    } else {
        span / steps as f64
    };
    let stepper = Stepper::new(state.grid(), params, &SchemeConfig { dt, ..*cfg })?;
    let recorder = Recorder {
        params,
        stationary: derive_params(params).ok(),
        observers,
    };

    let started = Instant::now();
    let mut field = state;
    let mut records = vec![recorder.record(&field)];
    let mut next_sample = options.sample_interval.map(|s| t0 + s);
    for i in 0..steps {
        stepper.advance(&mut field)?;
        field.set_time(t0 + (i + 1) as f64 * dt);
        if let Some(limit) = options.max_wall {
            if started.elapsed() > limit {
                return Err(SolverError::BudgetExceeded {
                    steps: i + 1,
                    t: field.t(),
                });
            }
        }
        let last = i + 1 == steps;
        if let (Some(next), Some(interval)) = (next_sample.as_mut(), options.sample_interval) {
            if field.t() >= *next - 1e-9 * dt {
                while *next <= field.t() + 1e-9 * dt {
                    *next += interval;
                }
                if !last {
                    records.push(recorder.record(&field));
                }
            }
        }
        if last {
            records.push(recorder.record(&field));
        }
    }
    Ok(Evolution {
        field,
        records,
        steps,
        dt,
        elapsed: started.elapsed(),
    })
}

pub fn write_trajectory_csv<W: Write>(records: &[TrajectoryRecord], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if records.is_empty() {
        writer.write_record(["t", "mass", "m2", "l1_to_w0", "stat_residual"])?;
    }
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct FieldRow {
    p: f64,
    w: f64,
}

/// Final field as `(p, w)` rows.
pub fn write_field_csv<W: Write>(field: &Field, out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for (p, w) in field.iter() {
        writer.serialize(FieldRow { p, w })?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpe_solver::{init_state, Grid, InitialProfile};

    #[test]
    fn lands_on_t_end_and_samples() {
        let grid = Grid::new(10.0, 100).unwrap();
        let params = LatticeParams::reference();
        let f = init_state(&grid, &InitialProfile::Gaussian { width: 1.0 }).unwrap();
        let opts = EvolveOptions {
            sample_interval: Some(0.25),
            ..Default::default()
        };
        let ev = evolve(
            f,
            &params,
            &SchemeConfig::chang_cooper(0.03),
            1.0,
            &Observer::ALL,
            &opts,
        )
        .unwrap();
        assert_eq!(ev.steps, 34);
        assert!((ev.field.t() - 1.0).abs() < 1e-15);
        let times: Vec<f64> = ev.records.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 5);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 1.0);
        assert!(ev.records.iter().all(|r| r.l1_to_w0.is_some()));
    }

    #[test]
    fn budget_enforced() {
        let grid = Grid::new(10.0, 100).unwrap();
        let f = init_state(&grid, &InitialProfile::Gaussian { width: 1.0 }).unwrap();
        let opts = EvolveOptions {
            max_steps: 10,
            ..Default::default()
        };
        let err = evolve(
            f,
            &LatticeParams::reference(),
            &SchemeConfig::chang_cooper(0.01),
            1.0,
            &[],
            &opts,
        );
        assert!(matches!(
            err,
            Err(SolverError::BudgetExceeded { steps: 100, .. })
        ));
    }

    #[test]
    fn trajectory_header() {
        let mut buf = Vec::new();
        let rec = TrajectoryRecord {
            t: 0.5,
            mass: Some(1.0),
            m2: None,
            l1_to_w0: Some(0.0),
            stat_residual: Some(2.0),
        };
        write_trajectory_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,mass,m2,l1_to_w0,stat_residual\n0.5,1.0,,0.0,2.0\n");
    }
}
