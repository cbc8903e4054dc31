//! Generalized scalings
//!
//! ```text
//! X = -p ∂_p + σ t ∂_t + ν p² w^(1+δ) ∂_w
//! ```
//!
//! their group flow, second prolongation, and the coefficients of the
//! determining residual obtained by applying the prolonged field to the
//! Fokker–Planck equation. With `ν = 2βZ^δ` and `δ = q - 1` the field leaves
//! the stationary state invariant; only `σ = -2` makes the residual vanish
//! for large `|p|` along decaying solutions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::DerivedParams;

mod adapted;
mod flow;
mod invariance;
mod prolongation;
mod residual;
mod scan;

pub use adapted::{from_adapted, to_adapted, AdaptedPoint};
pub use flow::{critical_parameter, flow_map, flow_time, generator_variation, FlowPoint};
pub use invariance::{invariance_residual, InvarianceResidual};
pub use prolongation::{prolong_coeffs, ProlongedCoeffs};
pub use residual::{
    closed_a, closed_a2, determining_residual, extract_a, probe_scales, A1Form, ResidualCoeffs,
};
pub use scan::{
    asymptotic_scan, fit_loglog_slope, write_decay_csv, DecayReport, DecayRow, DecaySummary,
    LogLogFit, ScanLadder, TailProfile,
};

/// The time weight singled out by the large-|p| limit of `A2`.
pub const CANONICAL_SIGMA: f64 = -2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("flow leaves the domain: bracket non-positive (critical s* = {s_critical:?})")]
    FlowBlowUp { s_critical: Option<f64> },
    #[error("density must be positive, got w = {w}")]
    NonPositiveDensity { w: f64 },
    #[error("time must be positive, got t = {t}")]
    NonPositiveTime { t: f64 },
    #[error("closed forms for A0 and A1 exist only at sigma = -2 (got sigma = {sigma})")]
    ClosedFormUnavailable { sigma: f64 },
    #[error("profile does not decay to a normalizable tail (k = {k}, need k > 1/2)")]
    NonDecayingProfile { k: f64 },
    #[error("invalid scan ladder: {0}")]
    InvalidLadder(String),
}

/// Coefficients of `X = -p ∂_p + σ t ∂_t + ν p² w^(1+δ) ∂_w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub sigma: f64,
    pub nu: f64,
    pub delta: f64,
}

impl GeneratorSpec {
    pub fn new(sigma: f64, nu: f64, delta: f64) -> Result<Self, SymmetryError> {
        if !sigma.is_finite() || !nu.is_finite() {
            return Err(SymmetryError::InvalidGenerator(format!(
                "sigma = {sigma}, nu = {nu} must be finite"
            )));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(SymmetryError::InvalidGenerator(format!(
                "delta must be positive, got {delta}"
            )));
        }
        Ok(Self { sigma, nu, delta })
    }

    /// `σ = -2, ν = 2βZ^δ`, with the stationary state's δ.
    pub fn canonical(d: &DerivedParams) -> Self {
        Self {
            sigma: CANONICAL_SIGMA,
            nu: d.nu(),
            delta: d.delta(),
        }
    }

    /// Same w-component as the canonical field, arbitrary time weight.
    pub fn with_sigma(d: &DerivedParams, sigma: f64) -> Self {
        Self {
            sigma,
            ..Self::canonical(d)
        }
    }

    pub fn xi(&self, p: f64) -> f64 {
        -p
    }

    pub fn tau(&self, t: f64) -> f64 {
        self.sigma * t
    }

    pub fn phi(&self, p: f64, w: f64) -> f64 {
        self.nu * p * p * w.powf(1.0 + self.delta)
    }
}

/// A second-order jet `(p, t, w, w_p, w_t, w_pp)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub p: f64,
    pub t: f64,
    pub w: f64,
    pub w_p: f64,
    pub w_t: f64,
    pub w_pp: f64,
}

impl JetPoint {
    pub fn is_finite(&self) -> bool {
        [self.p, self.t, self.w, self.w_p, self.w_t, self.w_pp]
            .iter()
            .all(|v| v.is_finite())
    }
}
