use super::{GeneratorSpec, JetPoint, SymmetryError};

/// Characteristic `φ - w_p ξ - w_t τ = ν p² w^(1+δ) + p w_p - σ t w_t`.
pub fn generator_variation(jet: &JetPoint, gen: &GeneratorSpec) -> f64 {
    gen.phi(jet.p, jet.w) - jet.w_p * gen.xi(jet.p) - jet.w_t * gen.tau(jet.t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPoint {
    pub p: f64,
    pub w: f64,
}

/// Group parameter at which `1 - c (1 - e^{-2s})` vanishes, where
/// `c = (νδ/2) p0² w0^δ`; `None` when the flow exists for all s.
pub fn critical_parameter(p0: f64, w0: f64, gen: &GeneratorSpec) -> Option<f64> {
    let c = 0.5 * gen.nu * gen.delta * p0 * p0 * w0.powf(gen.delta);
    if c == 0.0 {
        return None;
    }
    let arg = 1.0 - 1.0 / c;
    (arg > 0.0).then(|| -0.5 * arg.ln())
}

/// Exact solution of `dp/ds = -p`, `dw/ds = ν p² w^(1+δ)` from `(p0, w0)`:
///
/// ```text
/// p(s) = e^{-s} p0
/// w(s) = w0 [1 - (νδ/2) p0² (1 - e^{-2s}) w0^δ]^(-1/δ)
/// ```
pub fn flow_map(p0: f64, w0: f64, s: f64, gen: &GeneratorSpec) -> Result<FlowPoint, SymmetryError> {
    if !(w0 > 0.0) {
        return Err(SymmetryError::NonPositiveDensity { w: w0 });
    }
    let c = 0.5 * gen.nu * gen.delta * p0 * p0 * w0.powf(gen.delta);
    // 1 - e^{-2s} without cancellation at small s
    let bracket = 1.0 + c * (-2.0 * s).exp_m1();
    if !(bracket > 0.0) {
        return Err(SymmetryError::FlowBlowUp {
            s_critical: critical_parameter(p0, w0, gen),
        });
    }
    Ok(FlowPoint {
        p: (-s).exp() * p0,
        w: w0 * (-bracket.ln() / gen.delta).exp(),
    })
}

/// `t(s) = e^{σ s} t0`.
pub fn flow_time(t0: f64, s: f64, gen: &GeneratorSpec) -> f64 {
    (gen.sigma * s).exp() * t0
}
