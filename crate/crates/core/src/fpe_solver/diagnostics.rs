use serde::Serialize;

use super::Field;
use crate::model::{eval_coefficients, DerivedParams, LatticeParams};

/// `max_i |∂_p (h w - g w_p)|` with centred differences for both
/// derivatives; the two outermost cells on each side are skipped.
pub fn stationarity_residual(state: &Field, params: &LatticeParams) -> f64 {
    let w = state.values();
    let p = state.grid().centers();
    let dp = state.grid().dp();
    let n = w.len();
    let flux: Vec<f64> = (1..n - 1)
        .map(|i| {
            let c = eval_coefficients(p[i], params);
            c.h * w[i] - c.g * (w[i + 1] - w[i - 1]) / (2.0 * dp)
        })
        .collect();
    // flux[j] lives at cell j + 1
    flux.windows(3)
        .map(|f| ((f[2] - f[0]) / (2.0 * dp)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment {
    pub order: u32,
    pub value: f64,
    /// `|p|^(n+1) |w|` is not smaller at the edge than at half the domain,
    /// so the on-grid value is truncation dominated.
    pub diverging: bool,
}

/// `∫ pⁿ w dp` by the cell-centred (midpoint) rule, which is the rule that
/// defines the discrete mass.
pub fn moments(state: &Field, orders: &[u32]) -> Vec<Moment> {
    let dp = state.grid().dp();
    let p = state.grid().centers();
    let w = state.values();
    let n = w.len();
    orders
        .iter()
        .map(|&order| {
            let value = p
                .iter()
                .zip(w)
                .map(|(p, w)| p.powi(order as i32) * w)
                .sum::<f64>()
                * dp;
            let weight = |i: usize| p[i].abs().powi(order as i32 + 1) * w[i].abs();
            let (left_half, right_half) = (n / 4, 3 * n / 4);
            let grows =
                |edge: usize, half: usize| weight(edge) > 0.0 && weight(edge) >= weight(half);
            Moment {
                order,
                value,
                diverging: grows(0, left_half) || grows(n - 1, right_half),
            }
        })
        .collect()
}

/// `Σ |w_i - w0(p_i)| dp`.
pub fn l1_to_stationary(state: &Field, d: &DerivedParams) -> f64 {
    state
        .iter()
        .map(|(p, w)| (w - d.density(p)).abs())
        .sum::<f64>()
        * state.grid().dp()
}

pub fn l1_distance(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        * a.grid().dp()
}
