use serde::{Deserialize, Serialize};

use super::tail::{
    normalizable_variation, tail_exponent, NormalizabilityCheck, TailClass, TailFit,
};
use crate::fpe_solver::Field;
use crate::model::{eval_coefficients, DerivedParams, LatticeParams};

/// The three integrals making up `I[δw]` on a sampled state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    /// State time; multiplies the flux term.
    pub t: f64,
    /// `I[ν p² w^q]`.
    pub i_phi: f64,
    /// `I[p w_p]`.
    pub i_scale: f64,
    /// `I[∂_p(h w - g w_p)] = J(p_max) - J(-p_max)`.
    pub i_flux: f64,
    /// `i_phi + i_scale - 2t i_flux`.
    pub total: f64,
    pub phi_finite: bool,
    pub scale_finite: bool,
    pub flux_finite: bool,
    pub tail: Option<TailFit>,
    pub normalizability: Option<NormalizabilityCheck>,
}

impl VariationReport {
    pub fn all_finite(&self) -> bool {
        self.phi_finite && self.scale_finite && self.flux_finite
    }

    /// `kq ≤ 3/2` detected from the tail fit.
    pub fn non_normalizable_variation(&self) -> bool {
        matches!(
            self.normalizability,
            Some(NormalizabilityCheck {
                variation_ok: false,
                ..
            })
        )
    }
}

/// Ratio of the contributions of the two outermost dyadic shells
/// `P/2 < |p| ≤ P` and `P/4 < |p| ≤ P/2`. Partial sums over growing
/// windows settle (Cauchy) only when it is below 1; a power `|p|^(-m)`
/// gives `2^(1-m)`.
fn shells_converge(field: &Field, integrand: &[f64]) -> bool {
    let p_max = field.grid().p_max();
    let (mut outer, mut inner) = (0.0, 0.0);
    for (&p, &f) in field.grid().centers().iter().zip(integrand) {
        let a = p.abs();
        if a > 0.5 * p_max {
            outer += f.abs();
        } else if a > 0.25 * p_max {
            inner += f.abs();
        }
    }
    outer == 0.0 || (inner > 0.0 && outer < inner)
}

/// Midpoint sums over the cells; `w_p` by centered differences with zero
/// ghost cells, so that `i_scale = -mass` up to the edge values.
pub fn variation_integrals(
    state: &Field,
    params: &LatticeParams,
    d: &DerivedParams,
) -> VariationReport {
    let w = state.values();
    let p = state.grid().centers();
    let dp = state.grid().dp();
    let n = w.len();
    let (nu, q) = (d.nu(), d.q());
    let at = |i: isize| {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            w[i as usize]
        }
    };

    let phi: Vec<f64> = (0..n)
        .map(|i| nu * p[i] * p[i] * w[i].max(0.0).powf(q))
        .collect();
    let scale: Vec<f64> = (0..n)
        .map(|i| p[i] * (at(i as isize + 1) - at(i as isize - 1)) / (2.0 * dp))
        .collect();
    let i_phi = phi.iter().sum::<f64>() * dp;
    let i_scale = scale.iter().sum::<f64>() * dp;

    let flux_at = |i: usize, w_p: f64| {
        let c = eval_coefficients(p[i], params);
        c.h * w[i] - c.g * w_p
    };
    let i_flux = flux_at(n - 1, (w[n - 1] - w[n - 2]) / dp) - flux_at(0, (w[1] - w[0]) / dp);

    // the ghost-cell jump at the two ends is not part of the tail
    let mut interior = scale.clone();
    interior[0] = 0.0;
    interior[n - 1] = 0.0;

    let tail = tail_exponent(state).ok();
    let normalizability = tail.and_then(|fit| match fit.class {
        TailClass::PowerLaw => normalizable_variation(fit.k_hat.max(f64::MIN_POSITIVE), q).ok(),
        TailClass::SuperPolynomial => Some(NormalizabilityCheck {
            normalization_ok: true,
            variation_ok: true,
        }),
        TailClass::NonDecaying => Some(NormalizabilityCheck {
            normalization_ok: false,
            variation_ok: false,
        }),
        TailClass::Irregular => None,
    });
    let tail_ok = normalizability.is_none_or(|c| c.variation_ok);

    let t = state.t();
    VariationReport {
        t,
        i_phi,
        i_scale,
        i_flux,
        total: i_phi + i_scale - 2.0 * t * i_flux,
        phi_finite: i_phi.is_finite() && shells_converge(state, &phi) && tail_ok,
        scale_finite: i_scale.is_finite() && shells_converge(state, &interior),
        flux_finite: i_flux.is_finite(),
        tail,
        normalizability,
    }
}
