//! Variation of the normalization integral under the canonical generalized
//! scaling, tail-exponent estimation and parameter sweeps.
//!
//! Along solutions the variation of `w` is
//! `δw = ν p² w^q + p w_p - 2t ∂_p(h w - g w_p)` and its integral splits into
//! `I[ν p² w^q] + I[p w_p] - 2t I[∂_p(h w - g w_p)]`. The first term is the
//! only one that can diverge for a normalizable `w`; for `w ~ p^(-2k)` it is
//! finite iff `kq > 3/2`.

use thiserror::Error;

mod sweep;
mod tail;
mod variation;

pub use sweep::{
    sweep, EvolutionOutcome, ParamsOutcome, RawParams, ScanOutcome, SweepConfig, SweepEvolve,
    SweepReport, A2_VANISH_TOL,
};
pub use tail::{normalizable_variation, tail_exponent, NormalizabilityCheck, TailClass, TailFit};
pub use variation::{variation_integrals, VariationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("tail fit needs positive samples over at least one decade of p > 0 (found {points} usable points)")]
    InsufficientTail { points: usize },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("normalizability check needs k > 0 and 1 < q < 3, got k = {k}, q = {q}")]
    InvalidExponents { k: f64, q: f64 },
}
