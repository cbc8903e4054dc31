use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::fpe_solver::Field;
use crate::symmetry::fit_loglog_slope;

/// Samples below this are treated as underflowed.
const SAFE_FLOOR: f64 = 1e-300;
/// Minimum coefficient of determination for a power-law verdict.
const POWER_LAW_R2: f64 = 0.999;
/// Outer/inner half-window slope ratio beyond which the decay is super-polynomial.
const STEEPENING_RATIO: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailClass {
    PowerLaw,
    SuperPolynomial,
    NonDecaying,
    /// Decaying, but neither log-linear nor steepening.
    Irregular,
}

/// Fit of `w ~ p^(-2k)` over the outer decade of the positive half-grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub k_hat: f64,
    pub fit_window: (f64, f64),
    pub r2: f64,
    pub class: TailClass,
}

pub fn tail_exponent(field: &Field) -> Result<TailFit, AnalysisError> {
    // outermost positive sample above the floor, then walk inwards while w is monotone
    let pts: Vec<(f64, f64)> = field
        .iter()
        .filter(|&(p, w)| p > 0.0 && w > SAFE_FLOOR)
        .collect();
    let Some(&(p_out, _)) = pts.last() else {
        return Err(AnalysisError::InsufficientTail { points: 0 });
    };
    let p_in = p_out / 10.0;
    let window: Vec<(f64, f64)> = pts
        .into_iter()
        .filter(|&(p, _)| p >= p_in * (1.0 - 1e-12))
        .collect();
    if window.len() < 4 || window[0].0 > p_in * (1.0 + 1e-9) + field.grid().dp() {
        return Err(AnalysisError::InsufficientTail {
            points: window.len(),
        });
    }
    let xs: Vec<f64> = window.iter().map(|x| x.0).collect();
    let ys: Vec<f64> = window.iter().map(|x| x.1).collect();
    let fit = fit_loglog_slope(&xs, &ys).ok_or(AnalysisError::InsufficientTail {
        points: window.len(),
    })?;
    let k_hat = -fit.slope / 2.0;
    let fit_window = (xs[0], xs[xs.len() - 1]);

    let class = if fit.slope >= 0.0 {
        TailClass::NonDecaying
    } else {
        // split the decade at its geometric midpoint
        let mid = (fit_window.0 * fit_window.1).sqrt();
        let half = |inner: bool| {
            let (x, y): (Vec<f64>, Vec<f64>) = window
                .iter()
                .filter(|(p, _)| (*p < mid) == inner)
                .copied()
                .unzip();
            fit_loglog_slope(&x, &y).map(|f| f.slope)
        };
        let steepening = match (half(true), half(false)) {
            (Some(inner), Some(outer)) if inner < 0.0 => outer / inner,
            _ => 1.0,
        };
        if steepening > STEEPENING_RATIO {
            TailClass::SuperPolynomial
        } else if fit.r2 > POWER_LAW_R2 {
            TailClass::PowerLaw
        } else {
            TailClass::Irregular
        }
    };
    Ok(TailFit {
        k_hat,
        fit_window,
        r2: fit.r2,
        class,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizabilityCheck {
    /// `k > 1/2`: the profile itself is normalizable.
    pub normalization_ok: bool,
    /// `kq > 3/2`: its variation under the generator is normalizable.
    pub variation_ok: bool,
}

pub fn normalizable_variation(k: f64, q: f64) -> Result<NormalizabilityCheck, AnalysisError> {
    if !(k > 0.0) || !(q > 1.0 && q < 3.0) {
        return Err(AnalysisError::InvalidExponents { k, q });
    }
    Ok(NormalizabilityCheck {
        normalization_ok: k > 0.5,
        variation_ok: k * q > 1.5,
    })
}
