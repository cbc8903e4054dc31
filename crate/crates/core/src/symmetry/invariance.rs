use serde::Serialize;

use crate::fpe_solver::Field;
use crate::model::DerivedParams;

/// Sup-norm of `ν p² w^q + p w_p` over a sampled profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceResidual {
    pub sup: f64,
    pub argmax_p: f64,
    /// Cells with `w ≤ 0`; skipped in the norm.
    pub nonpositive: Vec<usize>,
}

/// Vanishes (to O(dp²)) exactly when the profile has the Tsallis form.
/// `w_p` by centered differences, one-sided at the two end cells.
pub fn invariance_residual(field: &Field, d: &DerivedParams) -> InvarianceResidual {
    let w = field.values();
    let p = field.grid().centers();
    let dp = field.grid().dp();
    let n = w.len();
    let (nu, q) = (d.nu(), d.q());
    let mut out = InvarianceResidual {
        sup: 0.0,
        argmax_p: 0.0,
        nonpositive: Vec::new(),
    };
    for i in 0..n {
        if !(w[i] > 0.0) {
            out.nonpositive.push(i);
            continue;
        }
        let w_p = if i == 0 {
            (w[1] - w[0]) / dp
        } else if i == n - 1 {
            (w[n - 1] - w[n - 2]) / dp
        } else {
            (w[i + 1] - w[i - 1]) / (2.0 * dp)
        };
        let r = (nu * p[i] * p[i] * w[i].powf(q) + p[i] * w_p).abs();
        if r > out.sup {
            out.sup = r;
            out.argmax_p = p[i];
        }
    }
    out
}
