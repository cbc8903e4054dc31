//! Run configuration: one JSON document, every block strictly typed.

use std::path::PathBuf;

use lattice_lab::analysis::SweepConfig;
use lattice_lab::fpe_solver::{Grid, GridSpec, ProfileSpec, SchemeConfig};
use lattice_lab::symmetry::{ScanLadder, TailProfile, CANONICAL_SIGMA};
use lattice_lab::{DerivedParams, LatticeParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn canonical_sigma() -> f64 {
    CANONICAL_SIGMA
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: Option<LatticeParams>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub scheme: Option<SchemeConfig>,
    #[serde(default)]
    pub evolve: Option<EvolveBlock>,
    #[serde(default)]
    pub flow: Option<FlowBlock>,
    #[serde(default)]
    pub residuals: Option<ResidualsBlock>,
    #[serde(default)]
    pub scan: Option<ScanBlock>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveBlock {
    pub t_end: f64,
    pub initial: ProfileSpec,
    #[serde(default)]
    pub sample_interval: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(default)]
    pub max_wall_seconds: Option<f64>,
}

/// Orbits of the group flow started at `(p0, w_factor · w0(p0))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowBlock {
    #[serde(default = "canonical_sigma")]
    pub sigma: f64,
    pub p0: Vec<f64>,
    pub s_min: f64,
    pub s_max: f64,
    #[serde(default = "default_flow_samples")]
    pub samples: usize,
    #[serde(default = "one")]
    pub t0: f64,
    #[serde(default = "one")]
    pub w_factor: f64,
}

fn default_flow_samples() -> usize {
    21
}

/// Where the coefficient comparison is evaluated. Points are explicit
/// `p_values`, or `random_points` drawn uniformly from `[-p_range, p_range]`
/// with the run seed; the density is `w_factor · w0(p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualsBlock {
    #[serde(default = "canonical_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub p_values: Option<Vec<f64>>,
    #[serde(default)]
    pub random_points: Option<usize>,
    #[serde(default = "default_p_range")]
    pub p_range: f64,
    #[serde(default = "one")]
    pub w_factor: f64,
}

fn default_p_range() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanProfile {
    #[default]
    Stationary,
    PowerLaw {
        amplitude: f64,
        k: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    #[serde(default = "canonical_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub ladder: ScanLadder,
    #[serde(default)]
    pub profile: ScanProfile,
}

impl ScanProfile {
    pub fn to_tail(self, d: &DerivedParams) -> TailProfile {
        match self {
            ScanProfile::Stationary => TailProfile::Stationary(*d),
            ScanProfile::PowerLaw { amplitude, k } => TailProfile::PowerLaw { amplitude, k },
        }
    }
}

/// Parse a config document; unknown keys and invalid parameters are
/// rejected here with the serde message naming the key.
pub fn parse_config(text: &str) -> Result<(RunConfig, serde_json::Value), CliError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("malformed config: {e}")))?;
    let config: RunConfig = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Validation(format!("config: {e}")))?;
    Ok((config, value))
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

impl RunConfig {
    pub fn require_params(&self) -> Result<LatticeParams, CliError> {
        self.params
            .ok_or_else(|| invalid("missing block \"params\""))
    }

    pub fn require_grid(&self) -> Result<Grid, CliError> {
        let spec = self
            .grid
            .as_ref()
            .ok_or_else(|| invalid("missing block \"grid\""))?;
        Grid::from_spec(spec).map_err(|e| invalid(format!("grid: {e}")))
    }

    pub fn require_scheme(&self) -> Result<SchemeConfig, CliError> {
        let scheme = self
            .scheme
            .ok_or_else(|| invalid("missing block \"scheme\""))?;
        scheme
            .validate()
            .map_err(|e| invalid(format!("scheme: {e}")))?;
        Ok(scheme)
    }

    pub fn require_evolve(&self) -> Result<&EvolveBlock, CliError> {
        let ev = self
            .evolve
            .as_ref()
            .ok_or_else(|| invalid("missing block \"evolve\""))?;
        if !(ev.t_end >= 0.0) || !ev.t_end.is_finite() {
            return Err(invalid(format!(
                "evolve.t_end must be finite and non-negative, got {}",
                ev.t_end
            )));
        }
        if let ProfileSpec::Gaussian { width } = ev.initial {
            if !(width > 0.0) {
                return Err(invalid(format!(
                    "evolve.initial.width must be positive, got {width}"
                )));
            }
        }
        if let Some(s) = ev.sample_interval {
            if !(s > 0.0) {
                return Err(invalid(format!(
                    "evolve.sample_interval must be positive, got {s}"
                )));
            }
        }
        if let Some(s) = ev.max_wall_seconds {
            if !(s > 0.0) {
                return Err(invalid(format!(
                    "evolve.max_wall_seconds must be positive, got {s}"
                )));
            }
        }
        Ok(ev)
    }

    pub fn require_flow(&self) -> Result<&FlowBlock, CliError> {
        let f = self
            .flow
            .as_ref()
            .ok_or_else(|| invalid("missing block \"flow\""))?;
        finite("flow.sigma", f.sigma)?;
        finite("flow.s_min", f.s_min)?;
        finite("flow.s_max", f.s_max)?;
        if f.s_max < f.s_min {
            return Err(invalid("flow.s_max must not be below flow.s_min"));
        }
        if f.samples < 2 {
            return Err(invalid("flow.samples must be at least 2"));
        }
        if !(f.t0 > 0.0) {
            return Err(invalid(format!("flow.t0 must be positive, got {}", f.t0)));
        }
        if !(f.w_factor > 0.0) || !f.w_factor.is_finite() {
            return Err(invalid(format!(
                "flow.w_factor must be positive, got {}",
                f.w_factor
            )));
        }
        for &p in &f.p0 {
            finite("flow.p0", p)?;
        }
        Ok(f)
    }

    pub fn require_residuals(&self) -> Result<&ResidualsBlock, CliError> {
        let r = self
            .residuals
            .as_ref()
            .ok_or_else(|| invalid("missing block \"residuals\""))?;
        finite("residuals.sigma", r.sigma)?;
        if r.p_values.is_some() && r.random_points.is_some() {
            return Err(invalid(
                "residuals: give either p_values or random_points, not both",
            ));
        }
        if let Some(ps) = &r.p_values {
            for &p in ps {
                finite("residuals.p_values", p)?;
            }
        }
        if !(r.p_range > 0.0) || !r.p_range.is_finite() {
            return Err(invalid(format!(
                "residuals.p_range must be positive, got {}",
                r.p_range
            )));
        }
        if !(r.w_factor > 0.0) || !r.w_factor.is_finite() {
            return Err(invalid(format!(
                "residuals.w_factor must be positive, got {}",
                r.w_factor
            )));
        }
        Ok(r)
    }

    pub fn require_scan(&self) -> Result<&ScanBlock, CliError> {
        let s = self
            .scan
            .as_ref()
            .ok_or_else(|| invalid("missing block \"scan\""))?;
        finite("scan.sigma", s.sigma)?;
        s.ladder
            .validate()
            .map_err(|e| invalid(format!("scan.ladder: {e}")))?;
        if let ScanProfile::PowerLaw { amplitude, k } = s.profile {
            TailProfile::PowerLaw { amplitude, k }
                .validate()
                .map_err(|e| invalid(format!("scan.profile: {e}")))?;
        }
        Ok(s)
    }

    pub fn require_sweep(&self) -> Result<&SweepConfig, CliError> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| invalid("missing block \"sweep\""))?;
        s.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"params": {"alpha": 1, "gamma0": 0.1, "gamma1": 0.5, "p_c": 1}}"#;

    #[test]
    fn minimal_config() {
        let (cfg, _) = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.require_params().unwrap(), LatticeParams::reference());
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn missing_key_is_named() {
        let err =
            parse_config(r#"{"params": {"alpha": 1, "gamma0": 0.1, "gamma1": 0.5}}"#).unwrap_err();
        assert!(err.to_string().contains("p_c"), "{err}");
    }

    #[test]
    fn negative_gamma1() {
        let err =
            parse_config(r#"{"params": {"alpha": 1, "gamma0": 0.1, "gamma1": -1, "p_c": 1}}"#)
                .unwrap_err();
        assert!(err.to_string().contains("gamma1 ≥ 0 required"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_config(
            r#"{"params": {"alpha": 1, "gamma0": 0.1, "gamma1": 0.5, "p_c": 1}, "gird": {}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("gird"), "{err}");
        let err = parse_config(r#"{"scan": {"sigma": -2, "slope": 1}}"#).unwrap_err();
        assert!(err.to_string().contains("slope"), "{err}");
    }

    #[test]
    fn block_checks() {
        let (cfg, _) = parse_config(r#"{"grid": {"p_max": 10, "n": 7}}"#).unwrap();
        assert!(cfg.require_grid().is_err());
        assert!(cfg
            .require_scheme()
            .unwrap_err()
            .to_string()
            .contains("scheme"));
    }
}
