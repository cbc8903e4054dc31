//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use lattice_lab::symmetry::{GeneratorSpec, JetPoint};
use lattice_lab::{derive_params, DerivedParams, LatticeParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random physical parameters with `δ ∈ [0.05, 1.9)`.
pub fn random_params(rng: &mut ChaCha8Rng) -> (LatticeParams, DerivedParams) {
    let alpha = rng.gen_range(0.5..2.0);
    let p_c: f64 = rng.gen_range(0.5..2.0);
    let gamma1 = rng.gen_range(0.0..1.0);
    let delta = rng.gen_range(0.05..1.9);
    let params = LatticeParams::new(alpha, 0.5 * delta * alpha * p_c * p_c, gamma1, p_c).unwrap();
    (params, derive_params(&params).unwrap())
}

/// Classical RK4 for `dp/ds = -p`, `dw/ds = ν p² w^(1+δ)`.
pub fn rk4_flow(p0: f64, w0: f64, s: f64, gen: &GeneratorSpec, steps: usize) -> (f64, f64) {
    let f = |p: f64, w: f64| (-p, gen.nu * p * p * w.powf(1.0 + gen.delta));
    let h = s / steps as f64;
    let (mut p, mut w) = (p0, w0);
    for _ in 0..steps {
        let k1 = f(p, w);
        let k2 = f(p + 0.5 * h * k1.0, w + 0.5 * h * k1.1);
        let k3 = f(p + 0.5 * h * k2.0, w + 0.5 * h * k2.1);
        let k4 = f(p + h * k3.0, w + h * k3.1);
        p += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        w += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (p, w)
}

/// Value and first two derivatives in one variable.
#[derive(Clone, Copy)]
pub struct Taylor2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Taylor2 {
    fn var(x: f64) -> Self {
        Self {
            v: x,
            d1: 1.0,
            d2: 0.0,
        }
    }
    fn scale(self, c: f64) -> Self {
        Self {
            v: c * self.v,
            d1: c * self.d1,
            d2: c * self.d2,
        }
    }
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
    fn add_const(self, c: f64) -> Self {
        Self {
            v: self.v + c,
            ..self
        }
    }
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
    fn powf(self, a: f64) -> Self {
        let f1 = a * self.v.powf(a - 1.0);
        let f2 = a * (a - 1.0) * self.v.powf(a - 2.0);
        Self {
            v: self.v.powf(a),
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
        }
    }
}

/// Jet of the image of the quadratic surface through `jet` under the flow
/// with parameter `eps`, at the image of `(p, t)`: `(W_T, W_P, W_PP)`.
pub fn transformed_jet(jet: &JetPoint, gen: &GeneratorSpec, eps: f64) -> (f64, f64, f64) {
    let (nu, delta, sigma) = (gen.nu, gen.delta, gen.sigma);
    let surface = |dp: Taylor2, dt: Taylor2| {
        dp.scale(jet.w_p)
            .add(dt.scale(jet.w_t))
            .add(dp.mul(dp).scale(0.5 * jet.w_pp))
            .add_const(jet.w)
    };
    // W(P, T) = F(p', w(p', t')) with p' = e^ε P, t' = e^{-σε} T and
    // F(p, w) = w [1 - (νδ/2) p² (1 - e^{-2ε}) w^δ]^(-1/δ).
    let c = 0.5 * nu * delta * (-(-2.0 * eps).exp_m1());
    let image = |p_prime: Taylor2, w: Taylor2| {
        let bracket = p_prime
            .mul(p_prime)
            .mul(w.powf(delta))
            .scale(-c)
            .add_const(1.0);
        w.mul(bracket.powf(-1.0 / delta))
    };
    let (big_p, big_t) = ((-eps).exp() * jet.p, (sigma * eps).exp() * jet.t);

    // Derivatives in P at fixed T.
    let p_prime = Taylor2::var(big_p).scale(eps.exp());
    let dp = p_prime.add_const(-jet.p);
    let zero = Taylor2 {
        v: (-sigma * eps).exp() * big_t - jet.t,
        d1: 0.0,
        d2: 0.0,
    };
    let wp = image(p_prime, surface(dp, zero));

    // Derivative in T at fixed P.
    let t_prime = Taylor2::var(big_t).scale((-sigma * eps).exp());
    let dt = t_prime.add_const(-jet.t);
    let fixed_p = Taylor2 {
        v: eps.exp() * big_p,
        d1: 0.0,
        d2: 0.0,
    };
    let wt = image(fixed_p, surface(fixed_p.add_const(-jet.p), dt));
    (wt.d1, wp.d1, wp.d2)
}

/// `d/dε` at 0 by central differences with one Richardson step.
pub fn derivative_at_zero(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let central = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (4.0 * central(0.5 * h) - central(h)) / 3.0
}
