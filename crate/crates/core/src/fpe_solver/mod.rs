//! Conservative finite-volume evolution of the momentum Fokker–Planck
//! equation on a truncated symmetric grid with no-flux ends.

use thiserror::Error;

mod diagnostics;
mod evolve;
mod grid;
mod scheme;

pub use diagnostics::{l1_distance, l1_to_stationary, moments, stationarity_residual, Moment};
pub use evolve::{
    evolve, write_field_csv, write_trajectory_csv, Evolution, EvolveOptions, Observer,
    TrajectoryRecord,
};
pub use grid::{init_state, Field, Grid, GridSpec, InitialProfile, ProfileSpec};
pub use scheme::{bernoulli, face_coefficients, step, Boundary, Method, SchemeConfig, Stepper};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid initial profile: {0}")]
    InvalidProfile(String),
    #[error("initial profile is negative or non-finite at cell {index} (value {value})")]
    NegativeProfile { index: usize, value: f64 },
    #[error("expected {expected} cell values, found {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("dt = {dt} exceeds the explicit stability limit {limit}")]
    StabilityViolation { dt: f64, limit: f64 },
    #[error("non-finite value in cell {index} at t = {t}")]
    NonFinite { index: usize, t: f64 },
    #[error("step budget exceeded after {steps} steps (t = {t})")]
    BudgetExceeded { steps: usize, t: f64 },
}
