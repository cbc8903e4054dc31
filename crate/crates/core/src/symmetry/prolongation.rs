use super::{GeneratorSpec, JetPoint};

/// First-order changes of `(w_t, w_p, w_pp)` under the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProlongedCoeffs {
    pub psi_t: f64,
    pub psi_p: f64,
    pub psi_pp: f64,
}

/// Second prolongation by the total-derivative rule
///
/// ```text
/// Ψ_p  = D_p φ - w_p D_p ξ - w_t D_p τ
/// Ψ_t  = D_t φ - w_p D_t ξ - w_t D_t τ
/// Ψ_pp = D_p Ψ_p - w_pp D_p ξ - w_pt D_p τ
/// ```
///
/// with `ξ = -p`, `τ = σ t`, `φ = ν p² w^(1+δ)`. Since `ξ` depends only on p
/// and `τ` only on t, `D_p τ = D_t ξ = 0` and no `w_pt` is needed.
pub fn prolong_coeffs(jet: &JetPoint, gen: &GeneratorSpec) -> ProlongedCoeffs {
    let JetPoint {
        p,
        w,
        w_p,
        w_t,
        w_pp,
        ..
    } = *jet;
    let (nu, delta, sigma) = (gen.nu, gen.delta, gen.sigma);
    let w_d = w.powf(delta);
    let w_d1 = w_d * w;
    let q = 1.0 + delta;

    // D_p φ = 2νp w^(1+δ) + ν(1+δ) p² w^δ w_p ;  D_p ξ = -1
    let psi_p = 2.0 * nu * p * w_d1 + nu * q * p * p * w_d * w_p + w_p;
    // D_t φ = ν(1+δ) p² w^δ w_t ;  D_t τ = σ
    let psi_t = nu * q * p * p * w_d * w_t - sigma * w_t;
    // D_p Ψ_p + w_pp, with D_p(w^δ) = δ w^(δ-1) w_p
    let d_psi_p = 2.0 * nu * w_d1
        + 2.0 * nu * q * p * w_d * w_p
        + 2.0 * nu * q * p * w_d * w_p
        + nu * q * delta * p * p * w.powf(delta - 1.0) * w_p * w_p
        + nu * q * p * p * w_d * w_pp
        + w_pp;
    ProlongedCoeffs {
        psi_t,
        psi_p,
        psi_pp: d_psi_p + w_pp,
    }
}
