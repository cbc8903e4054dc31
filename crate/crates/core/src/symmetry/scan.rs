use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{extract_a, GeneratorSpec, SymmetryError, CANONICAL_SIGMA};
use crate::model::{DerivedParams, LatticeParams};

/// Smallest density kept in a scan; below this `w^(δ-1)` loses meaning.
const DENSITY_FLOOR: f64 = 1e-290;

/// A fitted slope at or above this counts as a plateau rather than decay.
const DECAY_SLOPE: f64 = -0.25;

/// Decaying profile along whose graph the coefficients are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailProfile {
    Stationary(DerivedParams),
    /// `amplitude · p^(-2k)`.
    PowerLaw {
        amplitude: f64,
        k: f64,
    },
}

impl TailProfile {
    pub fn validate(&self) -> Result<(), SymmetryError> {
        match *self {
            TailProfile::Stationary(_) => Ok(()),
            TailProfile::PowerLaw { amplitude, k } => {
                if !(k > 0.5) || !k.is_finite() {
                    return Err(SymmetryError::NonDecayingProfile { k });
                }
                if !(amplitude > 0.0) || !amplitude.is_finite() {
                    return Err(SymmetryError::NonPositiveDensity { w: amplitude });
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, p: f64) -> f64 {
        match *self {
            TailProfile::Stationary(d) => d.density(p),
            TailProfile::PowerLaw { amplitude, k } => amplitude * p.abs().powf(-2.0 * k),
        }
    }
}

/// Geometric momentum ladder; slopes are fitted over the last `fit_decades`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanLadder {
    pub p_min: f64,
    pub p_max: f64,
    pub points_per_decade: usize,
    pub fit_decades: f64,
}

impl Default for ScanLadder {
    fn default() -> Self {
        Self {
            p_min: 10.0,
            p_max: 1e6,
            points_per_decade: 5,
            fit_decades: 3.0,
        }
    }
}

impl ScanLadder {
    pub fn validate(&self) -> Result<(), SymmetryError> {
        if !(self.p_min > 0.0) || !(self.p_max > self.p_min) || !self.p_max.is_finite() {
            return Err(SymmetryError::InvalidLadder(format!(
                "need 0 < p_min < p_max, got p_min = {}, p_max = {}",
                self.p_min, self.p_max
            )));
        }
        if self.points_per_decade < 2 {
            return Err(SymmetryError::InvalidLadder(
                "points_per_decade must be at least 2".into(),
            ));
        }
        let span = (self.p_max / self.p_min).log10();
        if !(self.fit_decades > 0.0) || self.fit_decades > span + 1e-12 {
            return Err(SymmetryError::InvalidLadder(format!(
                "fit_decades must lie in (0, {span}], got {}",
                self.fit_decades
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let span = (self.p_max / self.p_min).log10();
        let steps = (span * self.points_per_decade as f64).round() as usize;
        (0..=steps)
            .map(|i| self.p_min * 10f64.powf(span * i as f64 / steps as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub p: f64,
    #[serde(rename = "abs_A0")]
    pub abs_a0: f64,
    #[serde(rename = "abs_A1")]
    pub abs_a1: f64,
    #[serde(rename = "abs_A2")]
    pub abs_a2: f64,
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// `None` when fewer than two points have positive finite coordinates.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some(LogLogFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub sigma: f64,
    pub slope_a0: Option<f64>,
    pub slope_a1: Option<f64>,
    pub slope_a2: Option<f64>,
    pub slope_a11: Option<f64>,
    /// Signed `A2` at the largest ladder point.
    pub a2_plateau: f64,
    /// `-γ0 (2 + σ)`.
    pub expected_a2_plateau: f64,
    /// All three fitted slopes are at most -1/4 (or the coefficient is identically zero).
    pub all_vanish: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub summary: DecaySummary,
}

/// Evaluate `|A0|, |A1|, |A2|` along the profile for `p` on the ladder and
/// fit log-log slopes over the outer window.
pub fn asymptotic_scan(
    params: &LatticeParams,
    gen: &GeneratorSpec,
    profile: &TailProfile,
    ladder: &ScanLadder,
) -> Result<DecayReport, SymmetryError> {
    profile.validate()?;
    ladder.validate()?;
    let mut rows = Vec::new();
    let mut a11 = Vec::new();
    let mut a2_last = f64::NAN;
    for p in ladder.points() {
        let w = profile.value(p);
        if !(w >= DENSITY_FLOOR) {
            break;
        }
        let a = extract_a(p, 1.0, w, params, gen);
        rows.push(DecayRow {
            p,
            abs_a0: a.a0.abs(),
            abs_a1: a.a1.abs(),
            abs_a2: a.a2.abs(),
        });
        a11.push(a.a11.abs());
        a2_last = a.a2;
    }
    if rows.len() < 2 {
        return Err(SymmetryError::InvalidLadder(
            "profile underflows before two ladder points".into(),
        ));
    }

    let p_fit = rows.last().map(|r| r.p).unwrap_or(ladder.p_max) / 10f64.powf(ladder.fit_decades)
        * (1.0 - 1e-12);
    let start = rows.iter().position(|r| r.p >= p_fit).unwrap_or(0);
    let window = &rows[start..];
    let xs: Vec<f64> = window.iter().map(|r| r.p).collect();
    let slope = |f: fn(&DecayRow) -> f64| {
        let ys: Vec<f64> = window.iter().map(f).collect();
        fit_loglog_slope(&xs, &ys).map(|fit| fit.slope)
    };
    let slope_a0 = slope(|r| r.abs_a0);
    let slope_a1 = slope(|r| r.abs_a1);
    let slope_a2 = slope(|r| r.abs_a2);
    let slope_a11 = fit_loglog_slope(&xs, &a11[start..]).map(|fit| fit.slope);

    let decays = |s: Option<f64>, f: fn(&DecayRow) -> f64| match s {
        Some(s) => s <= DECAY_SLOPE,
        None => window.iter().all(|r| f(r) == 0.0),
    };
    let all_vanish = decays(slope_a0, |r| r.abs_a0)
        && decays(slope_a1, |r| r.abs_a1)
        && decays(slope_a2, |r| r.abs_a2);

    let summary = DecaySummary {
        sigma: gen.sigma,
        slope_a0,
        slope_a1,
        slope_a2,
        slope_a11,
        a2_plateau: a2_last,
        expected_a2_plateau: -params.gamma0() * (2.0 + gen.sigma),
        all_vanish,
    };
    Ok(DecayReport { rows, summary })
}

impl DecaySummary {
    pub fn is_canonical(&self) -> bool {
        self.sigma == CANONICAL_SIGMA
    }
}

/// CSV with header `p,abs_A0,abs_A1,abs_A2`.
pub fn write_decay_csv<W: Write>(rows: &[DecayRow], out: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for row in rows {
        wtr.serialize(row)?;
    }
    if rows.is_empty() {
        wtr.write_record(["p", "abs_A0", "abs_A1", "abs_A2"])?;
    }
    wtr.flush()?;
    Ok(())
}
