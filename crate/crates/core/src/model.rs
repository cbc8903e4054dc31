//! Physical parameters of the lattice, the drift/diffusion coefficients and
//! the Tsallis (q-exponential) stationary state.
//!
//! The momentum-space Fokker–Planck equation is
//!
//! ```text
//! w_t = -∂_p [ h(p) w - g(p) w_p ]
//! h(p) = -α p β(p),   g(p) = γ0 + γ1 β(p),   β(p) = 1 / (1 + (p/p_c)²)
//! ```
//!
//! and its normalizable stationary solution is
//! `w0(p) = (1/Z) (1 + β δ p²)^(-1/δ)` with `β = α / (2(γ0 + γ1))` and
//! `δ = q - 1 = 2 γ0 / (α p_c²)`. Everything downstream is parametrised by δ;
//! `q`, `μ = -1/δ` and the tail exponent `k = 1/δ` are derived views.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::quadrature::{self, QuadratureError};

/// Relative tolerance used to detect the regime boundaries q = 5/3 and q = 3.
pub const REGIME_BOUNDARY_TOL: f64 = 1e-12;

/// Required relative agreement between the quadrature and closed-form Z.
pub const Z_AGREEMENT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{name} = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error(
        "q = {q} is outside the physical range 1 < q < 3: the stationary state is not normalizable"
    )]
    OutsidePhysicalRange { q: f64 },
    #[error("q = {q} ≤ 1: use the Gaussian-limit state (gamma0 = 0) instead")]
    GaussianLimit { q: f64 },
    #[error("normalization mismatch: quadrature Z = {quadrature}, closed form Z = {closed_form}")]
    NormalizationMismatch { quadrature: f64, closed_form: f64 },
    #[error("Tsallis index q = {q} must exceed 1 for regime classification")]
    IndexBelowOne { q: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLatticeParams {
    alpha: f64,
    gamma0: f64,
    gamma1: f64,
    p_c: f64,
}

/// The four constants of the drift and diffusion coefficients, in
/// nondimensional units. Construction enforces
/// `alpha > 0, gamma0 > 0, gamma1 ≥ 0, p_c > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLatticeParams")]
pub struct LatticeParams {
    alpha: f64,
    gamma0: f64,
    gamma1: f64,
    p_c: f64,
}

impl TryFrom<RawLatticeParams> for LatticeParams {
    type Error = ModelError;

    fn try_from(raw: RawLatticeParams) -> Result<Self, Self::Error> {
        LatticeParams::new(raw.alpha, raw.gamma0, raw.gamma1, raw.p_c)
    }
}

fn require(
    ok: bool,
    name: &'static str,
    requirement: &'static str,
    value: f64,
) -> Result<(), ModelError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            requirement,
            value,
        })
    }
}

impl LatticeParams {
    pub fn new(alpha: f64, gamma0: f64, gamma1: f64, p_c: f64) -> Result<Self, ModelError> {
        require(alpha > 0.0, "alpha", "alpha > 0 required", alpha)?;
        require(gamma0 > 0.0, "gamma0", "gamma0 > 0 required", gamma0)?;
        require(gamma1 >= 0.0, "gamma1", "gamma1 ≥ 0 required", gamma1)?;
        require(p_c > 0.0, "p_c", "p_c > 0 required", p_c)?;
        Ok(Self {
            alpha,
            gamma0,
            gamma1,
            p_c,
        })
    }

    /// α = 1, γ0 = 0.1, γ1 = 0.5, p_c = 1 (q = 1.2).
    pub fn reference() -> Self {
        Self {
            alpha: 1.0,
            gamma0: 0.1,
            gamma1: 0.5,
            p_c: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }
    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    /// `β = α / (2(γ0 + γ1))`.
    pub fn beta(&self) -> f64 {
        self.alpha / (2.0 * (self.gamma0 + self.gamma1))
    }

    /// `δ = 2γ0 / (α p_c²)`.
    pub fn delta(&self) -> f64 {
        2.0 * self.gamma0 / (self.alpha * self.p_c * self.p_c)
    }

    pub fn coefficients(&self, p: f64) -> Coefficients {
        eval_coefficients(p, self)
    }
}

/// Drift, diffusion and the Lorentzian factor at a single momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub h: f64,
    pub g: f64,
    pub beta_p: f64,
}

pub fn eval_coefficients(p: f64, params: &LatticeParams) -> Coefficients {
    let x = p / params.p_c;
    let beta_p = 1.0 / (1.0 + x * x);
    Coefficients {
        h: -params.alpha * p * beta_p,
        g: params.gamma0 + params.gamma1 * beta_p,
        beta_p,
    }
}

/// `h`, `g` and their first two momentum derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientJet {
    pub h: f64,
    pub dh: f64,
    pub d2h: f64,
    pub g: f64,
    pub dg: f64,
    pub d2g: f64,
}

pub fn coefficient_jet(p: f64, params: &LatticeParams) -> CoefficientJet {
    let pc2 = params.p_c * params.p_c;
    let b = 1.0 / (1.0 + p * p / pc2);
    let db = -2.0 * p / pc2 * b * b;
    let d2b = -2.0 * b * b / pc2 + 8.0 * p * p * b * b * b / (pc2 * pc2);
    let a = params.alpha;
    CoefficientJet {
        h: -a * p * b,
        dh: -a * (b + p * db),
        d2h: -a * (2.0 * db + p * d2b),
        g: params.gamma0 + params.gamma1 * b,
        dg: params.gamma1 * db,
        d2g: params.gamma1 * d2b,
    }
}

/// Diffusion regime of the stationary state, with explicit boundary flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// 1 < q < 5/3: finite second moment.
    NormalDiffusion,
    /// q = 5/3 (to [`REGIME_BOUNDARY_TOL`]).
    AnomalousThreshold,
    /// 5/3 < q < 3: divergent second moment.
    AnomalousDiffusion,
    /// q = 3 (to [`REGIME_BOUNDARY_TOL`]).
    NormalizabilityThreshold,
    /// q > 3.
    NonNormalizable,
}

impl Regime {
    pub fn is_boundary(self) -> bool {
        matches!(
            self,
            Regime::AnomalousThreshold | Regime::NormalizabilityThreshold
        )
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::NormalDiffusion => "NormalDiffusion",
            Regime::AnomalousThreshold => "AnomalousThreshold",
            Regime::AnomalousDiffusion => "AnomalousDiffusion",
            Regime::NormalizabilityThreshold => "NormalizabilityThreshold",
            Regime::NonNormalizable => "NonNormalizable",
        };
        f.write_str(s)
    }
}

pub fn classify_regime(q: f64) -> Result<Regime, ModelError> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(ModelError::IndexBelowOne { q });
    }
    let near = |b: f64| (q - b).abs() <= REGIME_BOUNDARY_TOL * b;
    Ok(if near(5.0 / 3.0) {
        Regime::AnomalousThreshold
    } else if near(3.0) {
        Regime::NormalizabilityThreshold
    } else if q < 5.0 / 3.0 {
        Regime::NormalDiffusion
    } else if q < 3.0 {
        Regime::AnomalousDiffusion
    } else {
        Regime::NonNormalizable
    })
}

/// Both evaluations of the normalization constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    /// `sqrt(π/(βδ)) Γ(1/δ - 1/2) / Γ(1/δ)`.
    pub closed_form: f64,
    /// Adaptive quadrature on `[0, P]` plus the power-law tail series beyond `P`.
    pub quadrature: f64,
}

impl Normalization {
    pub fn relative_gap(&self) -> f64 {
        (self.quadrature - self.closed_form).abs() / self.closed_form
    }
}

/// `∫_P^∞ (1 + a p²)^(-m) dp` by the binomial expansion in `1/(a p²)`;
/// requires `a P² > 1` and `m > 1/2`.
fn power_tail_integral(a: f64, m: f64, p_cut: f64) -> f64 {
    let x = a * p_cut * p_cut;
    let base = (-m * x.ln()).exp() * p_cut;
    let mut coef = 1.0;
    let mut xpow = 1.0;
    let mut sum = 0.0;
    for j in 0..200 {
        let jf = j as f64;
        let term = coef * xpow / (2.0 * m + 2.0 * jf - 1.0);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        coef *= -(m + jf) / (jf + 1.0);
        xpow /= x;
    }
    base * sum
}

pub fn normalization_z(params: &LatticeParams) -> Result<Normalization, ModelError> {
    let delta = params.delta();
    let m = 1.0 / delta;
    if !(m > 0.5) {
        return Err(ModelError::OutsidePhysicalRange { q: 1.0 + delta });
    }
    let a = params.beta() * delta;
    let closed_form = (PI / a).sqrt() * (ln_gamma(m - 0.5) - ln_gamma(m)).exp();

    // Cut where a P² = 10⁴ so the tail series converges in a handful of terms.
    let p_cut = 100.0 / a.sqrt();
    // Geometric panels starting at the core width 1/sqrt(a m) ≈ 1/sqrt(β).
    let integrand = |p: f64| (-m * (a * p * p).ln_1p()).exp();
    let mut lo = 0.0;
    let mut hi = (1.0 / (a * m).sqrt()).min(p_cut);
    let mut body = 0.0;
    while lo < p_cut {
        body += quadrature::integrate(integrand, lo, hi, 1e-14, 1e-14)?.value;
        lo = hi;
        hi = (2.0 * hi).min(p_cut);
    }
    let quadrature = 2.0 * (body + power_tail_integral(a, m, p_cut));
    let norm = Normalization {
        closed_form,
        quadrature,
    };
    if norm.relative_gap() > Z_AGREEMENT_TOL {
        return Err(ModelError::NormalizationMismatch {
            quadrature,
            closed_form,
        });
    }
    Ok(norm)
}

/// Constants of the stationary state. Only constructible for 1 < q < 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    params: LatticeParams,
    beta: f64,
    delta: f64,
    z: f64,
}

pub fn derive_params(params: &LatticeParams) -> Result<DerivedParams, ModelError> {
    let delta = params.delta();
    let q = 1.0 + delta;
    if !(delta > 0.0) {
        return Err(ModelError::GaussianLimit { q });
    }
    if q >= 3.0 {
        return Err(ModelError::OutsidePhysicalRange { q });
    }
    let norm = normalization_z(params)?;
    Ok(DerivedParams {
        params: *params,
        beta: params.beta(),
        delta,
        z: norm.closed_form,
    })
}

impl DerivedParams {
    pub fn params(&self) -> &LatticeParams {
        &self.params
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn q(&self) -> f64 {
        1.0 + self.delta
    }
    pub fn mu(&self) -> f64 {
        -1.0 / self.delta
    }
    /// Coefficient of the canonical generator, `2 β Z^δ`.
    pub fn nu(&self) -> f64 {
        2.0 * self.beta * self.z.powf(self.delta)
    }
    pub fn z(&self) -> f64 {
        self.z
    }
    /// Tail exponent in `w0 ~ p^(-2k)`.
    pub fn k(&self) -> f64 {
        1.0 / self.delta
    }
    pub fn regime(&self) -> Regime {
        // q ∈ (1, 3) by construction
        classify_regime(self.q()).expect("q > 1 by construction")
    }

    pub fn density(&self, p: f64) -> f64 {
        tsallis_density(p, self)
    }

    /// `w0'(p) = -2 β p w0(p) / (1 + β δ p²)`.
    pub fn density_derivative(&self, p: f64) -> f64 {
        -2.0 * self.beta * p * self.density(p) / (1.0 + self.beta * self.delta * p * p)
    }

    /// `⟨p²⟩ = 1 / (βδ (2/δ - 3))`, finite only for q < 5/3.
    pub fn second_moment(&self) -> Option<f64> {
        let denom = 2.0 / self.delta - 3.0;
        (denom > 0.0).then(|| 1.0 / (self.beta * self.delta * denom))
    }

    /// Mass of the stationary state outside `[-p_max, p_max]`.
    pub fn tail_mass(&self, p_max: f64) -> f64 {
        let a = self.beta * self.delta;
        if a * p_max * p_max <= 1.0 {
            return f64::NAN;
        }
        2.0 * power_tail_integral(a, 1.0 / self.delta, p_max) / self.z
    }

    pub fn summary(&self) -> DerivedSummary {
        DerivedSummary {
            beta: self.beta,
            q: self.q(),
            delta: self.delta,
            mu: self.mu(),
            nu: self.nu(),
            z: self.z,
            k: self.k(),
            regime: self.regime(),
        }
    }
}

/// `(1/Z) (1 + β δ p²)^(-1/δ)`.
pub fn tsallis_density(p: f64, d: &DerivedParams) -> f64 {
    (-(d.beta * d.delta * p * p).ln_1p() / d.delta).exp() / d.z
}

/// JSON export of the derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedSummary {
    pub beta: f64,
    pub q: f64,
    pub delta: f64,
    pub mu: f64,
    pub nu: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub k: f64,
    pub regime: Regime,
}

/// The γ0 = 0 stationary state, `sqrt(β/π) exp(-β p²)` with `β = α / (2γ1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLimit {
    beta: f64,
}

impl GaussianLimit {
    pub fn new(alpha: f64, gamma1: f64, p_c: f64) -> Result<Self, ModelError> {
        require(alpha > 0.0, "alpha", "alpha > 0 required", alpha)?;
        require(
            gamma1 > 0.0,
            "gamma1",
            "gamma1 > 0 required when gamma0 = 0",
            gamma1,
        )?;
        require(p_c > 0.0, "p_c", "p_c > 0 required", p_c)?;
        Ok(Self {
            beta: alpha / (2.0 * gamma1),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn z(&self) -> f64 {
        (PI / self.beta).sqrt()
    }

    pub fn density(&self, p: f64) -> f64 {
        (-self.beta * p * p).exp() / self.z()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // mpmath, 30 digits: quad and Γ-ratio agree.
    const Z_REF: f64 = 2.104_183_315_109_308_3;
    const NU_REF: f64 = 1.934_040_054_215_291_5;

    fn reference() -> DerivedParams {
        derive_params(&LatticeParams::reference()).unwrap()
    }

    #[test]
    fn reference_derived_constants() {
        let d = reference();
        assert!((d.beta() - 5.0 / 6.0).abs() < 1e-15);
        assert!((d.q() - 1.2).abs() < 1e-15);
        assert!((d.delta() - 0.2).abs() < 1e-15);
        assert!((d.mu() + 5.0).abs() < 1e-12);
        assert!((d.k() - 5.0).abs() < 1e-12);
        assert!((d.z() - Z_REF).abs() < 1e-13);
        assert!((d.nu() - NU_REF).abs() < 1e-13);
        assert_eq!(d.regime(), Regime::NormalDiffusion);
    }

    #[test]
    fn rejects_q_above_three() {
        let p = LatticeParams::new(1.0, 1.5, 0.0, 1.0).unwrap();
        let err = derive_params(&p).unwrap_err();
        assert_eq!(err, ModelError::OutsidePhysicalRange { q: 4.0 });
        assert!(err.to_string().contains("physical range"));
    }

    #[test]
    fn parameter_validation_names_the_key() {
        let err = LatticeParams::new(1.0, 0.1, -1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("gamma1 ≥ 0 required"));
        assert!(LatticeParams::new(0.0, 0.1, 0.5, 1.0).is_err());
        assert!(LatticeParams::new(1.0, 0.0, 0.5, 1.0).is_err());
        assert!(LatticeParams::new(1.0, 0.1, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn json_rejects_unknown_and_missing_keys() {
        let err = serde_json::from_str::<LatticeParams>(r#"{"alpha":1,"gamma0":0.1,"gamma1":0.5}"#)
            .unwrap_err();
        assert!(err.to_string().contains("p_c"));
        let err = serde_json::from_str::<LatticeParams>(
            r#"{"alpha":1,"gamma0":0.1,"gamma1":0.5,"p_c":1,"T":3}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }

    #[test]
    fn coefficients_at_hand_values() {
        let c = eval_coefficients(0.0, &LatticeParams::reference());
        assert_eq!(c.h, 0.0);
        assert!((c.g - 0.6).abs() < 1e-15);
        assert_eq!(c.beta_p, 1.0);
        let c = eval_coefficients(1.0, &LatticeParams::reference());
        assert!((c.beta_p - 0.5).abs() < 1e-15);
        assert!((c.h + 0.5).abs() < 1e-15);
        assert!((c.g - 0.35).abs() < 1e-15);
        let c = eval_coefficients(1e8, &LatticeParams::reference());
        assert!((c.h * 1e8 + 1.0).abs() < 1e-6);
        assert!((c.g - 0.1).abs() < 1e-15);
    }

    #[test]
    fn coefficient_jet_matches_finite_differences() {
        let params = LatticeParams::new(1.3, 0.2, 0.7, 0.8).unwrap();
        let h = 1e-4;
        for &p in &[-3.0, -0.4, 0.0, 0.9, 2.5] {
            let j = coefficient_jet(p, &params);
            let c = |x| eval_coefficients(x, &params);
            let (cm, c0, cp) = (c(p - h), c(p), c(p + h));
            assert!((j.dh - (cp.h - cm.h) / (2.0 * h)).abs() < 1e-7);
            assert!((j.dg - (cp.g - cm.g) / (2.0 * h)).abs() < 1e-7);
            assert!((j.d2h - (cp.h - 2.0 * c0.h + cm.h) / (h * h)).abs() < 1e-5);
            assert!((j.d2g - (cp.g - 2.0 * c0.g + cm.g) / (h * h)).abs() < 1e-5);
        }
    }

    #[test]
    fn stationary_density_values() {
        let d = reference();
        assert!((d.density(0.0) - 0.475_243_764_561_478_77).abs() < 1e-14);
        for &p in &[0.3, 2.0, 17.0] {
            assert_eq!(d.density(p), d.density(-p));
        }
    }

    #[test]
    fn stationary_tail_slope() {
        let d = reference();
        let (a, b) = (1e3f64, 1e6f64);
        let slope = (d.density(b).ln() - d.density(a).ln()) / (b.ln() - a.ln());
        assert!((slope + 10.0).abs() < 1e-4, "{slope}");
    }

    #[test]
    fn normalization_routes_agree() {
        let n = normalization_z(&LatticeParams::reference()).unwrap();
        assert!(n.relative_gap() < 1e-10);
        assert!((n.closed_form - Z_REF).abs() < 1e-13);
        // near q = 3 the tail is barely integrable
        let n = normalization_z(&LatticeParams::new(1.0, 0.95, 0.2, 1.0).unwrap()).unwrap();
        assert!(n.relative_gap() < 1e-10);
        let err = normalization_z(&LatticeParams::new(1.0, 1.0, 0.2, 1.0).unwrap());
        assert!(matches!(err, Err(ModelError::OutsidePhysicalRange { .. })));
    }

    #[test]
    fn gaussian_limit_of_z_and_density() {
        let params = LatticeParams::new(1.0, 1e-5, 0.5, 1.0).unwrap();
        let d = derive_params(&params).unwrap();
        let g = GaussianLimit::new(1.0, 0.5, 1.0).unwrap();
        assert!((d.z() - g.z()).abs() / g.z() < 1e-4);
        for &p in &[0.0, 0.5, 1.5, 3.0] {
            assert!((d.density(p) - g.density(p)).abs() < 1e-4 * g.density(0.0));
        }
        assert!(GaussianLimit::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn regime_classification() {
        assert_eq!(classify_regime(1.2).unwrap(), Regime::NormalDiffusion);
        assert_eq!(classify_regime(1.8).unwrap(), Regime::AnomalousDiffusion);
        assert_eq!(classify_regime(3.2).unwrap(), Regime::NonNormalizable);
        assert_eq!(
            classify_regime(5.0 / 3.0).unwrap(),
            Regime::AnomalousThreshold
        );
        assert_eq!(
            classify_regime(3.0).unwrap(),
            Regime::NormalizabilityThreshold
        );
        assert!(classify_regime(3.0).unwrap().is_boundary());
        assert!(classify_regime(1.0).is_err());
    }

    #[test]
    fn second_moment_closed_form() {
        assert!((reference().second_moment().unwrap() - 6.0 / 7.0).abs() < 1e-14);
        let anomalous = derive_params(&LatticeParams::new(1.0, 0.4, 0.5, 1.0).unwrap()).unwrap();
        assert_eq!(anomalous.regime(), Regime::AnomalousDiffusion);
        assert!(anomalous.second_moment().is_none());
    }

    #[test]
    fn tail_mass_beyond_fifty() {
        // mpmath: 2 ∫_50^∞ w0 = 4.16362e-13
        let m = reference().tail_mass(50.0);
        assert!((m - 4.163_620_915_845_6e-13).abs() < 1e-20, "{m:e}");
    }

    #[test]
    fn summary_json_keys() {
        let v = serde_json::to_value(reference().summary()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["Z", "beta", "delta", "k", "mu", "nu", "q", "regime"]);
        assert_eq!(v["regime"], "NormalDiffusion");
    }
}
