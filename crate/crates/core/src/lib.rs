//! Numerical laboratory for the optical-lattice momentum Fokker–Planck
//! equation: drift/diffusion model, Tsallis stationary state, conservative
//! time evolution, and the generalized-scaling asymptotic symmetry of the
//! equation together with the normalization-variation analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod analysis;
pub mod fpe_solver;
pub mod model;
pub mod quadrature;
pub mod symmetry;

pub use model::{
    classify_regime, derive_params, eval_coefficients, normalization_z, tsallis_density,
    DerivedParams, LatticeParams, ModelError, Regime,
};
