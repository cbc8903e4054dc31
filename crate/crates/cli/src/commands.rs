//! One function per subcommand. Each returns its files in memory; the caller
//! owns the run directory.

use std::time::Duration;

use lattice_lab::analysis::sweep;
use lattice_lab::fpe_solver::{
    evolve, init_state, write_field_csv, write_trajectory_csv, EvolveOptions, Observer,
    SchemeConfig, SolverError,
};
use lattice_lab::model::{normalization_z, ModelError, Regime};
use lattice_lab::symmetry::{
    asymptotic_scan, closed_a, closed_a2, critical_parameter, extract_a, flow_map, flow_time,
    to_adapted, write_decay_csv, A1Form, GeneratorSpec, SymmetryError, CANONICAL_SIGMA,
};
use lattice_lab::{derive_params, DerivedParams, LatticeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::{CliError, Command};

pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: serde_json::Value,
    pub stdout: Option<String>,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outputs, CliError> {
    match command {
        Command::Params => params(cfg),
        Command::Stationary => stationary(cfg),
        Command::Evolve => evolve_cmd(cfg),
        Command::Flow => flow(cfg),
        Command::Residuals => residuals(cfg),
        Command::Scan => scan(cfg),
        Command::Sweep => sweep_cmd(cfg),
    }
}

fn model_err(e: ModelError) -> CliError {
    match e {
        ModelError::NormalizationMismatch { .. } | ModelError::Quadrature(_) => {
            CliError::Numerical(e.to_string())
        }
        _ => CliError::Validation(e.to_string()),
    }
}

fn solver_err(e: SolverError) -> CliError {
    match e {
        SolverError::NonFinite { .. } | SolverError::BudgetExceeded { .. } => {
            CliError::Numerical(e.to_string())
        }
        _ => CliError::Validation(e.to_string()),
    }
}

fn symmetry_err(e: SymmetryError) -> CliError {
    match e {
        SymmetryError::FlowBlowUp { .. } => CliError::Numerical(e.to_string()),
        _ => CliError::Validation(e.to_string()),
    }
}

fn derived(cfg: &RunConfig) -> Result<(LatticeParams, DerivedParams), CliError> {
    let params = cfg.require_params()?;
    let d = derive_params(&params).map_err(model_err)?;
    Ok((params, d))
}

/// CSV with an explicit header row, written even when there are no rows.
fn csv_bytes<T: Serialize>(header: &[&str], rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    wtr.write_record(header)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn params(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let (params, d) = derived(cfg)?;
    let norm = normalization_z(&params).map_err(model_err)?;
    let report = json!({
        "params": params,
        "derived": d.summary(),
        "normalization": {
            "closed_form": norm.closed_form,
            "quadrature": norm.quadrature,
            "relative_gap": norm.relative_gap(),
        },
        "second_moment": d.second_moment(),
    });
    let text = serde_json::to_string_pretty(&report)?;
    Ok(Outputs {
        files: vec![("derived.json".into(), json_bytes(&report)?)],
        summary: report,
        stdout: Some(text),
    })
}

#[derive(Serialize)]
struct StationaryRow {
    p: f64,
    w0: f64,
}

fn stationary(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let (_, d) = derived(cfg)?;
    let grid = cfg.require_grid()?;
    let rows: Vec<StationaryRow> = grid
        .centers()
        .iter()
        .map(|&p| StationaryRow {
            p,
            w0: d.density(p),
        })
        .collect();
    let grid_mass = rows.iter().map(|r| r.w0).sum::<f64>() * grid.dp();
    let summary = json!({
        "derived": d.summary(),
        "grid_mass": grid_mass,
        "tail_mass_outside_grid": d.tail_mass(grid.p_max()),
    });
    Ok(Outputs {
        files: vec![("stationary.csv".into(), csv_bytes(&["p", "w0"], &rows)?)],
        summary,
        stdout: None,
    })
}

fn evolve_cmd(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let params = cfg.require_params()?;
    let grid = cfg.require_grid()?;
    let scheme = cfg.require_scheme()?;
    let block = cfg.require_evolve()?;
    let profile = block.initial.to_profile(&params).map_err(solver_err)?;
    let state = init_state(&grid, &profile).map_err(solver_err)?;
    let options = EvolveOptions {
        sample_interval: block.sample_interval,
        max_steps: block
            .max_steps
            .unwrap_or(EvolveOptions::default().max_steps),
        max_wall: block.max_wall_seconds.map(Duration::from_secs_f64),
    };
    let run = evolve(
        state,
        &params,
        &scheme,
        block.t_end,
        &Observer::ALL,
        &options,
    )
    .map_err(solver_err)?;

    let mut trajectory = Vec::new();
    write_trajectory_csv(&run.records, &mut trajectory)?;
    let mut field = Vec::new();
    write_field_csv(&run.field, &mut field)?;

    let m2: Vec<f64> = run.records.iter().filter_map(|r| r.m2).collect();
    let regime = derive_params(&params).ok().map(|d| d.regime());
    let last = run.records.last();
    let mut summary = json!({
        "steps": run.steps,
        "dt": run.dt,
        "explicit_dt_limit": SchemeConfig::explicit_dt_limit(&grid, &params),
        "final_mass": run.field.mass(),
        "mass_drift": (run.field.mass() - 1.0).abs(),
        "final_m2": last.and_then(|r| r.m2),
        "final_l1_to_w0": last.and_then(|r| r.l1_to_w0),
        "m2_monotone": m2.windows(2).all(|w| w[1] >= w[0]),
        "regime": regime,
    });
    if matches!(
        regime,
        Some(Regime::AnomalousDiffusion | Regime::AnomalousThreshold)
    ) {
        summary["truncation_note"] = json!(format!(
            "the stationary second moment diverges; on the truncated domain |p| <= {} it is bounded by {:.6e}, \
             so growth must eventually saturate",
            grid.p_max(),
            grid.p_max() * grid.p_max()
        ));
    }
    Ok(Outputs {
        files: vec![
            ("trajectory.csv".into(), trajectory),
            ("final_field.csv".into(), field),
        ],
        summary,
        stdout: None,
    })
}

#[derive(Serialize)]
struct FlowRow {
    p0: f64,
    s: f64,
    p: f64,
    t: f64,
    w: f64,
    w_stationary: f64,
    rel_dev: f64,
    y: f64,
    v: f64,
}

fn flow(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let (_, d) = derived(cfg)?;
    let block = cfg.require_flow()?;
    let gen = GeneratorSpec::new(block.sigma, d.nu(), d.delta()).map_err(symmetry_err)?;
    let mut rows = Vec::new();
    let mut orbits = Vec::new();
    let mut max_rel_dev: f64 = 0.0;
    for &p0 in &block.p0 {
        let w_start = block.w_factor * d.density(p0);
        let mut blown_up = 0;
        for i in 0..block.samples {
            let s =
                block.s_min + (block.s_max - block.s_min) * i as f64 / (block.samples - 1) as f64;
            let point = match flow_map(p0, w_start, s, &gen) {
                Ok(pt) => pt,
                Err(SymmetryError::FlowBlowUp { .. }) => {
                    blown_up += 1;
                    continue;
                }
                Err(e) => return Err(symmetry_err(e)),
            };
            let t = flow_time(block.t0, s, &gen);
            let w_stationary = d.density(point.p);
            let rel_dev = (point.w - w_stationary).abs() / w_stationary;
            max_rel_dev = max_rel_dev.max(rel_dev);
            let adapted = to_adapted(point.p, t, point.w, &d).map_err(symmetry_err)?;
            rows.push(FlowRow {
                p0,
                s,
                p: point.p,
                t,
                w: point.w,
                w_stationary,
                rel_dev,
                y: adapted.y,
                v: adapted.v,
            });
        }
        orbits.push(json!({
            "p0": p0,
            "w_start": w_start,
            "s_critical": critical_parameter(p0, w_start, &gen),
            "blown_up_samples": blown_up,
        }));
    }
    let summary = json!({
        "generator": gen,
        "orbits": orbits,
        "max_rel_dev_from_stationary": max_rel_dev,
        "z_pow_delta": d.z().powf(d.delta()),
    });
    let header = [
        "p0",
        "s",
        "p",
        "t",
        "w",
        "w_stationary",
        "rel_dev",
        "y",
        "v",
    ];
    Ok(Outputs {
        files: vec![
            ("flow.csv".into(), csv_bytes(&header, &rows)?),
            ("flow_summary.json".into(), json_bytes(&summary)?),
        ],
        summary,
        stdout: None,
    })
}

#[derive(Serialize)]
struct ResidualRow {
    p: f64,
    w: f64,
    a0_extracted: f64,
    a0_closed: Option<f64>,
    a1_extracted: f64,
    a1_closed: Option<f64>,
    a1_published: Option<f64>,
    a11_extracted: f64,
    a11_closed: Option<f64>,
    a2_extracted: f64,
    a2_closed: f64,
    rel_dev_a0: Option<f64>,
    rel_dev_a1: Option<f64>,
    rel_dev_a1_published: Option<f64>,
    rel_dev_a11: Option<f64>,
    rel_dev_a2: f64,
}

const RESIDUAL_HEADER: [&str; 16] = [
    "p",
    "w",
    "A0_extracted",
    "A0_closed",
    "A1_extracted",
    "A1_closed",
    "A1_published",
    "A11_extracted",
    "A11_closed",
    "A2_extracted",
    "A2_closed",
    "rel_dev_A0",
    "rel_dev_A1",
    "rel_dev_A1_published",
    "rel_dev_A11",
    "rel_dev_A2",
];

/// `|a - b| / |b|`, or `|a - b|` when `b = 0`.
fn rel_dev(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn max_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    values.fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

fn residuals(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let (params, d) = derived(cfg)?;
    let block = cfg.require_residuals()?;
    let gen = GeneratorSpec::with_sigma(&d, block.sigma);
    let points: Vec<f64> = match (&block.p_values, block.random_points) {
        (Some(ps), _) => ps.clone(),
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..n)
                .map(|_| rng.gen_range(-block.p_range..=block.p_range))
                .collect()
        }
        (None, None) => (0..=30)
            .map(|i| 0.1 * 10f64.powf(i as f64 / 10.0))
            .collect(),
    };
    let canonical = block.sigma == CANONICAL_SIGMA;
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let w = block.w_factor * d.density(p);
        let e = extract_a(p, 1.0, w, &params, &gen);
        let a2_closed = closed_a2(p, &params, block.sigma);
        let (repaired, published) = if canonical {
            (
                Some(closed_a(p, w, &params, &gen, A1Form::Repaired).map_err(symmetry_err)?),
                Some(closed_a(p, w, &params, &gen, A1Form::AsPublished).map_err(symmetry_err)?),
            )
        } else {
            (None, None)
        };
        rows.push(ResidualRow {
            p,
            w,
            a0_extracted: e.a0,
            a0_closed: repaired.map(|c| c.a0),
            a1_extracted: e.a1,
            a1_closed: repaired.map(|c| c.a1),
            a1_published: published.map(|c| c.a1),
            a11_extracted: e.a11,
            a11_closed: repaired.map(|c| c.a11),
            a2_extracted: e.a2,
            a2_closed,
            rel_dev_a0: repaired.map(|c| rel_dev(e.a0, c.a0)),
            rel_dev_a1: repaired.map(|c| rel_dev(e.a1, c.a1)),
            rel_dev_a1_published: published.map(|c| rel_dev(e.a1, c.a1)),
            rel_dev_a11: repaired.map(|c| rel_dev(e.a11, c.a11)),
            rel_dev_a2: rel_dev(e.a2, a2_closed),
        });
    }
    let summary = json!({
        "sigma": block.sigma,
        "points": rows.len(),
        "max_rel_dev_A0": max_of(rows.iter().filter_map(|r| r.rel_dev_a0)),
        "max_rel_dev_A1": max_of(rows.iter().filter_map(|r| r.rel_dev_a1)),
        "max_rel_dev_A1_published": max_of(rows.iter().filter_map(|r| r.rel_dev_a1_published)),
        "max_rel_dev_A11": max_of(rows.iter().filter_map(|r| r.rel_dev_a11)),
        "max_rel_dev_A2": max_of(rows.iter().map(|r| r.rel_dev_a2)),
    });
    Ok(Outputs {
        files: vec![
            ("residuals.csv".into(), csv_bytes(&RESIDUAL_HEADER, &rows)?),
            ("residuals_summary.json".into(), json_bytes(&summary)?),
        ],
        summary,
        stdout: None,
    })
}

fn scan(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let (params, d) = derived(cfg)?;
    let block = cfg.require_scan()?;
    let gen = GeneratorSpec::with_sigma(&d, block.sigma);
    let report = asymptotic_scan(&params, &gen, &block.profile.to_tail(&d), &block.ladder)
        .map_err(symmetry_err)?;
    let mut decay = Vec::new();
    write_decay_csv(&report.rows, &mut decay)?;
    let summary = serde_json::to_value(report.summary)?;
    Ok(Outputs {
        files: vec![
            ("decay.csv".into(), decay),
            ("decay_summary.json".into(), json_bytes(&report.summary)?),
        ],
        summary,
        stdout: None,
    })
}

fn sweep_cmd(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let block = cfg.require_sweep()?;
    let report = sweep(block).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut files = vec![("report.json".to_string(), json_bytes(&report)?)];
    for point in &report.points {
        for (j, scan) in point.scans.iter().enumerate() {
            if scan.error.is_none() {
                let mut bytes = Vec::new();
                write_decay_csv(&scan.rows, &mut bytes)?;
                files.push((format!("point-{}-scan-{}.csv", point.index, j), bytes));
            }
        }
        if let Some(ev) = point.evolution.as_ref().filter(|e| e.error.is_none()) {
            let mut bytes = Vec::new();
            write_trajectory_csv(&ev.records, &mut bytes)?;
            files.push((format!("point-{}-trajectory.csv", point.index), bytes));
        }
    }
    let summary = json!({
        "points": report.points.len(),
        "failures": report.failures(),
        "vanishing_sigmas": report.points.iter().map(|p| &p.vanishing_sigmas).collect::<Vec<_>>(),
    });
    Ok(Outputs {
        files,
        summary,
        stdout: None,
    })
}
