use serde::{Deserialize, Serialize};

use super::SymmetryError;
use crate::model::DerivedParams;

/// `y = p²/t`, `sigma_c = t`, `v = w^(-δ) - (νδ/2) p²`, and the sign of p
/// (y is even in p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptedPoint {
    pub y: f64,
    pub sigma_c: f64,
    pub v: f64,
    pub sign: f64,
}

pub fn to_adapted(
    p: f64,
    t: f64,
    w: f64,
    d: &DerivedParams,
) -> Result<AdaptedPoint, SymmetryError> {
    if !(t > 0.0) {
        return Err(SymmetryError::NonPositiveTime { t });
    }
    if !(w > 0.0) {
        return Err(SymmetryError::NonPositiveDensity { w });
    }
    let delta = d.delta();
    Ok(AdaptedPoint {
        y: p * p / t,
        sigma_c: t,
        v: w.powf(-delta) - 0.5 * d.nu() * delta * p * p,
        sign: if p < 0.0 { -1.0 } else { 1.0 },
    })
}

/// Inverse of [`to_adapted`], returning `(p, t, w)`.
pub fn from_adapted(
    pt: &AdaptedPoint,
    d: &DerivedParams,
) -> Result<(f64, f64, f64), SymmetryError> {
    if !(pt.sigma_c > 0.0) {
        return Err(SymmetryError::NonPositiveTime { t: pt.sigma_c });
    }
    let delta = d.delta();
    let t = pt.sigma_c;
    let p2 = pt.y * t;
    let base = pt.v + 0.5 * d.nu() * delta * p2;
    if !(base > 0.0) {
        return Err(SymmetryError::NonPositiveDensity { w: f64::NAN });
    }
    Ok((pt.sign * p2.sqrt(), t, base.powf(-1.0 / delta)))
}
