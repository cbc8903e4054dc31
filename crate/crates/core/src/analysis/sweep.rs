use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::fpe_solver::{
    evolve, init_state, EvolveOptions, Grid, GridSpec, Observer, ProfileSpec, SchemeConfig,
    TrajectoryRecord,
};
use crate::model::{derive_params, DerivedSummary, LatticeParams};
use crate::symmetry::{
    asymptotic_scan, DecayRow, DecaySummary, GeneratorSpec, ScanLadder, TailProfile,
};

/// `|A2|` at the top of the ladder below which the plateau counts as zero.
pub const A2_VANISH_TOL: f64 = 1e-8;

/// Unvalidated parameter point; invalid points are reported, not rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub alpha: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub p_c: f64,
}

impl From<LatticeParams> for RawParams {
    fn from(p: LatticeParams) -> Self {
        Self {
            alpha: p.alpha(),
            gamma0: p.gamma0(),
            gamma1: p.gamma1(),
            p_c: p.p_c(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEvolve {
    pub scheme: SchemeConfig,
    pub t_end: f64,
    pub initial: ProfileSpec,
    #[serde(default)]
    pub sample_interval: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub params_grid: Vec<RawParams>,
    pub sigmas: Vec<f64>,
    /// Required when `evolve` is set.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub evolve: Option<SweepEvolve>,
    #[serde(default)]
    pub ladder: ScanLadder,
}

impl SweepConfig {
    /// Checks everything except the parameter points themselves.
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |msg: String| Err(AnalysisError::InvalidSweep(msg));
        if let Some(s) = self.sigmas.iter().find(|s| !s.is_finite()) {
            return bad(format!("sigmas: {s} is not finite"));
        }
        self.ladder
            .validate()
            .map_err(|e| AnalysisError::InvalidSweep(format!("ladder: {e}")))?;
        if let Some(ev) = &self.evolve {
            let Some(spec) = &self.grid else {
                return bad("grid: required when evolve is set".into());
            };
            Grid::from_spec(spec).map_err(|e| AnalysisError::InvalidSweep(format!("grid: {e}")))?;
            ev.scheme
                .validate()
                .map_err(|e| AnalysisError::InvalidSweep(format!("evolve.scheme: {e}")))?;
            if !(ev.t_end >= 0.0) || !ev.t_end.is_finite() {
                return bad(format!(
                    "evolve.t_end must be finite and non-negative, got {}",
                    ev.t_end
                ));
            }
            if let Some(s) = ev.sample_interval {
                if !(s > 0.0) {
                    return bad(format!("evolve.sample_interval must be positive, got {s}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanOutcome {
    pub sigma: f64,
    pub summary: Option<DecaySummary>,
    pub a2_vanishes: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub rows: Vec<DecayRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionOutcome {
    pub steps: usize,
    pub dt: f64,
    pub final_mass: Option<f64>,
    pub final_m2: Option<f64>,
    pub final_l1_to_w0: Option<f64>,
    /// Second moment never decreases between samples.
    pub m2_monotone: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub records: Vec<TrajectoryRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsOutcome {
    pub index: usize,
    pub params: RawParams,
    pub derived: Option<DerivedSummary>,
    pub error: Option<String>,
    pub scans: Vec<ScanOutcome>,
    /// σ values whose `A2` plateau vanishes.
    pub vanishing_sigmas: Vec<f64>,
    pub evolution: Option<EvolutionOutcome>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SweepReport {
    pub points: Vec<ParamsOutcome>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
            + self
                .points
                .iter()
                .flat_map(|p| &p.scans)
                .filter(|s| s.error.is_some())
                .count()
            + self
                .points
                .iter()
                .filter_map(|p| p.evolution.as_ref())
                .filter(|e| e.error.is_some())
                .count()
    }
}

/// Parameter points run in parallel; the report keeps the input order.
pub fn sweep(config: &SweepConfig) -> Result<SweepReport, AnalysisError> {
    config.validate()?;
    let points = config
        .params_grid
        .par_iter()
        .enumerate()
        .map(|(index, raw)| run_point(index, raw, config))
        .collect();
    Ok(SweepReport { points })
}

fn run_point(index: usize, raw: &RawParams, config: &SweepConfig) -> ParamsOutcome {
    let mut out = ParamsOutcome {
        index,
        params: *raw,
        derived: None,
        error: None,
        scans: Vec::new(),
        vanishing_sigmas: Vec::new(),
        evolution: None,
    };
    let params = match LatticeParams::new(raw.alpha, raw.gamma0, raw.gamma1, raw.p_c) {
        Ok(p) => p,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let d = match derive_params(&params) {
        Ok(d) => d,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.derived = Some(d.summary());

    for &sigma in &config.sigmas {
        let gen = GeneratorSpec::with_sigma(&d, sigma);
        out.scans.push(
            match asymptotic_scan(&params, &gen, &TailProfile::Stationary(d), &config.ladder) {
                Ok(rep) => ScanOutcome {
                    sigma,
                    a2_vanishes: rep.summary.a2_plateau.abs() < A2_VANISH_TOL,
                    summary: Some(rep.summary),
                    error: None,
                    rows: rep.rows,
                },
                Err(e) => ScanOutcome {
                    sigma,
                    summary: None,
                    a2_vanishes: false,
                    error: Some(e.to_string()),
                    rows: vec![],
                },
            },
        );
    }
    out.vanishing_sigmas = out
        .scans
        .iter()
        .filter(|s| s.a2_vanishes)
        .map(|s| s.sigma)
        .collect();

    if let (Some(ev), Some(spec)) = (&config.evolve, &config.grid) {
        out.evolution = Some(run_evolution(&params, ev, spec));
    }
    out
}

fn run_evolution(params: &LatticeParams, ev: &SweepEvolve, spec: &GridSpec) -> EvolutionOutcome {
    let result = Grid::from_spec(spec)
        .and_then(|grid| init_state(&grid, &ev.initial.to_profile(params)?))
        .and_then(|state| {
            let options = EvolveOptions {
                sample_interval: ev.sample_interval,
                ..EvolveOptions::default()
            };
            evolve(
                state,
                params,
                &ev.scheme,
                ev.t_end,
                &Observer::ALL,
                &options,
            )
        });
    match result {
        Ok(run) => {
            let last = run.records.last().copied();
            let m2: Vec<f64> = run.records.iter().filter_map(|r| r.m2).collect();
            EvolutionOutcome {
                steps: run.steps,
                dt: run.dt,
                final_mass: last.and_then(|r| r.mass),
                final_m2: last.and_then(|r| r.m2),
                final_l1_to_w0: last.and_then(|r| r.l1_to_w0),
                m2_monotone: m2.windows(2).all(|w| w[1] >= w[0]),
                error: None,
                records: run.records,
            }
        }
        Err(e) => EvolutionOutcome {
            steps: 0,
            dt: ev.scheme.dt,
            final_mass: None,
            final_m2: None,
            final_l1_to_w0: None,
            m2_monotone: false,
            error: Some(e.to_string()),
            records: vec![],
        },
    }
}
