use lattice_lab::model::eval_coefficients;
use lattice_lab::quadrature::integrate;
use lattice_lab::symmetry::{
    closed_a, closed_a2, determining_residual, extract_a, flow_map, from_adapted,
    generator_variation, prolong_coeffs, to_adapted, A1Form, GeneratorSpec, JetPoint,
};
use lattice_lab::{derive_params, tsallis_density, DerivedParams, LatticeParams};
use proptest::prelude::*;

mod common;

use common::{derivative_at_zero, rk4_flow, transformed_jet};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Physical parameters parametrized by δ so that every draw is valid.
fn params_strategy(
    delta: std::ops::Range<f64>,
) -> impl Strategy<Value = (LatticeParams, DerivedParams)> {
    (0.5..2.0f64, 0.5..2.0f64, 0.0..1.0f64, delta).prop_map(|(alpha, p_c, gamma1, delta)| {
        let params =
            LatticeParams::new(alpha, 0.5 * delta * alpha * p_c * p_c, gamma1, p_c).unwrap();
        (params, derive_params(&params).unwrap())
    })
}

fn reference() -> (LatticeParams, DerivedParams) {
    let params = LatticeParams::reference();
    (params, derive_params(&params).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn density_forms_agree((_, d) in params_strategy(0.05..1.95), p in -200.0..200.0f64) {
        let mu = -1.0 / d.delta();
        let q_form = (1.0 - d.beta() / mu * p * p).powf(mu) / d.z();
        prop_assert!(rel(q_form, tsallis_density(p, &d)) < 1e-13);
        prop_assert_eq!(tsallis_density(p, &d), d.density(p));
    }

    #[test]
    fn coefficient_parity((params, _) in params_strategy(0.05..1.95), p in -50.0..50.0f64) {
        let c = eval_coefficients(p, &params);
        let m = eval_coefficients(-p, &params);
        prop_assert_eq!(c.h, -m.h);
        prop_assert_eq!(c.g, m.g);
        prop_assert_eq!(c.beta_p, m.beta_p);
        prop_assert!(c.h * p <= 0.0);
    }

    #[test]
    fn determining_residual_is_quadratic_in_w_p(
        (params, d) in params_strategy(0.05..1.95),
        sigma in -4.0..2.0f64,
        p in -10.0..10.0f64,
        t in 0.1..5.0f64,
        w_scale in 0.01..2.0f64,
        w_p in -3.0..3.0f64,
        w_pp in -3.0..3.0f64,
    ) {
        let gen = GeneratorSpec::with_sigma(&d, sigma);
        let w = w_scale * d.density(p);
        let c = extract_a(p, t, w, &params, &gen);
        let direct = determining_residual(&JetPoint { p, t, w, w_p, w_t: 0.0, w_pp }, &params, &gen);
        let scale = c.a0.abs() + (c.a1 * w_p).abs() + (c.a11 * w_p * w_p).abs() + (c.a2 * w_pp).abs();
        prop_assert!((direct - c.evaluate(w_p, w_pp)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn extracted_a2_matches_closed_form(
        (params, d) in params_strategy(0.05..1.95),
        sigma in -4.0..2.0f64,
        p in -100.0..100.0f64,
    ) {
        let gen = GeneratorSpec::with_sigma(&d, sigma);
        let e = extract_a(p, 1.0, d.density(p), &params, &gen).a2;
        prop_assert!(rel(e, closed_a2(p, &params, sigma)) < 1e-10);
    }

    #[test]
    fn repaired_closed_forms_match_at_canonical_sigma(
        (params, d) in params_strategy(0.05..1.95),
        p in -100.0..100.0f64,
    ) {
        let gen = GeneratorSpec::canonical(&d);
        let w = d.density(p);
        let e = extract_a(p, 1.0, w, &params, &gen);
        let c = closed_a(p, w, &params, &gen, A1Form::Repaired).unwrap();
        prop_assert!(rel(e.a1, c.a1) < 1e-8);
        prop_assert!(rel(e.a0, c.a0) < 1e-8);
        prop_assert!(rel(e.a11, c.a11) < 1e-8);
    }

    #[test]
    fn stationary_graph_is_flow_invariant(p0 in -30.0..30.0f64, s in -2.0..2.0f64) {
        let (_, d) = reference();
        let pt = flow_map(p0, d.density(p0), s, &GeneratorSpec::canonical(&d)).unwrap();
        prop_assert!((pt.p - (-s).exp() * p0).abs() <= 1e-15 * p0.abs());
        prop_assert!(rel(pt.w, d.density(pt.p)) < 1e-10);
    }

    #[test]
    fn flow_agrees_with_rk4(p0 in -4.0..4.0f64, factor in 0.2..2.0f64, s in -0.5..0.5f64) {
        let (_, d) = reference();
        let gen = GeneratorSpec::canonical(&d);
        let w0 = factor * d.density(p0);
        if let Ok(pt) = flow_map(p0, w0, s, &gen) {
            prop_assume!(pt.w < 1e2 * w0);
            let (p, w) = rk4_flow(p0, w0, s, &gen, 2000);
            prop_assert!(rel(pt.p, p) < 1e-9 && rel(pt.w, w) < 1e-9);
        }
    }

    #[test]
    fn flow_composes(p0 in -3.0..3.0f64, factor in 0.2..2.0f64, s1 in -0.4..0.4f64, s2 in -0.4..0.4f64) {
        let (_, d) = reference();
        let gen = GeneratorSpec::canonical(&d);
        let w0 = factor * d.density(p0);
        let (Ok(a), Ok(whole)) = (flow_map(p0, w0, s1, &gen), flow_map(p0, w0, s1 + s2, &gen)) else {
            return Ok(());
        };
        if let Ok(b) = flow_map(a.p, a.w, s2, &gen) {
            prop_assert!(rel(b.p, whole.p) < 1e-13 && rel(b.w, whole.w) < 1e-11);
        }
    }

    #[test]
    fn prolongation_matches_oracle(
        (_, d) in params_strategy(0.05..1.95),
        sigma in -4.0..2.0f64,
        p in -3.0..3.0f64,
        t in 0.2..3.0f64,
        w in 0.02..0.8f64,
        w_p in -1.0..1.0f64,
        w_t in -1.0..1.0f64,
        w_pp in -1.0..1.0f64,
    ) {
        let gen = GeneratorSpec::with_sigma(&d, sigma);
        let jet = JetPoint { p, t, w, w_p, w_t, w_pp };
        let psi = prolong_coeffs(&jet, &gen);
        let h = 1e-3 / (1.0 + gen.nu * p * p * w.powf(gen.delta) + sigma.abs());
        let fd_t = derivative_at_zero(|e| transformed_jet(&jet, &gen, e).0, h);
        let fd_p = derivative_at_zero(|e| transformed_jet(&jet, &gen, e).1, h);
        let fd_pp = derivative_at_zero(|e| transformed_jet(&jet, &gen, e).2, h);
        let scale = 1e-9 * (1.0 + psi.psi_t.abs() + psi.psi_p.abs() + psi.psi_pp.abs());
        prop_assert!((fd_t - psi.psi_t).abs() <= 1e-6 * psi.psi_t.abs() + scale);
        prop_assert!((fd_p - psi.psi_p).abs() <= 1e-6 * psi.psi_p.abs() + scale);
        prop_assert!((fd_pp - psi.psi_pp).abs() <= 1e-6 * psi.psi_pp.abs() + scale);
    }

    #[test]
    fn adapted_round_trip(
        (_, d) in params_strategy(0.05..1.95),
        p in -20.0..20.0f64,
        t in 0.01..100.0f64,
        factor in 0.1..10.0f64,
    ) {
        let w = factor * d.density(p);
        let (p2, t2, w2) = from_adapted(&to_adapted(p, t, w, &d).unwrap(), &d).unwrap();
        prop_assert!((p2 - p).abs() <= 1e-12 * (1.0 + p.abs()));
        prop_assert_eq!(t2, t);
        prop_assert!(rel(w2, w) < 1e-9);
    }

    #[test]
    fn adapted_invariants_along_orbits(
        p0 in -5.0..5.0f64,
        t0 in 0.1..5.0f64,
        factor in 0.2..2.0f64,
        s in -1.0..1.0f64,
    ) {
        let (_, d) = reference();
        let gen = GeneratorSpec::canonical(&d);
        let w0 = factor * d.density(p0);
        if let Ok(pt) = flow_map(p0, w0, s, &gen) {
            let a = to_adapted(p0, t0, w0, &d).unwrap();
            let b = to_adapted(pt.p, lattice_lab::symmetry::flow_time(t0, s, &gen), pt.w, &d).unwrap();
            prop_assert!(rel(b.y, a.y) < 1e-12);
            prop_assert!(rel(b.v, a.v) < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn second_moment_quadrature(( _, d) in params_strategy(0.05..0.5)) {
        let a = d.beta() * d.delta();
        let m = 1.0 / d.delta();
        let f = |p: f64| p * p * (-m * (a * p * p).ln_1p()).exp();
        let p_cut = 10.0 / a.sqrt();
        let body = integrate(f, 0.0, p_cut, 1e-14, 1e-12).unwrap().value;
        // ∫_P^∞ f(p) dp with u = 1/p
        let tail = integrate(|u: f64| if u == 0.0 { 0.0 } else { f(1.0 / u) / (u * u) }, 0.0, 1.0 / p_cut, 1e-16, 1e-12)
            .unwrap()
            .value;
        let quad = 2.0 * (body + tail) / d.z();
        prop_assert!(rel(quad, d.second_moment().unwrap()) < 1e-8);
    }
}

/// `ũ_s(p) - u(p)` against `s · Q` for a smooth profile pushed by the flow.
#[test]
fn first_order_group_consistency() {
    let (_, d) = reference();
    let gen = GeneratorSpec::canonical(&d);
    let u = |p: f64| 0.3 * (-0.5 * p * p).exp();
    let u_p = |p: f64| -p * u(p);
    // The image of the graph of u is the graph of ũ_s with
    // ũ_s(e^{-s} p') = F(p', u(p')); at a fixed point p take p' = e^s p.
    let pushed = |p: f64, s: f64| flow_map(s.exp() * p, u(s.exp() * p), s, &gen).unwrap().w;
    let p = 1.3;
    let q = generator_variation(
        &JetPoint {
            p,
            t: 1.0,
            w: u(p),
            w_p: u_p(p),
            w_t: 0.0,
            w_pp: 0.0,
        },
        &gen,
    );
    let err = |s: f64| (pushed(p, s) - u(p) - s * q).abs();
    let orders: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&s| (err(s) / err(0.5 * s)).log2())
        .collect();
    for order in orders {
        assert!(order >= 1.9, "{order}");
    }
}
