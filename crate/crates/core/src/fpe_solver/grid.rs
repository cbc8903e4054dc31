use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::model::{derive_params, DerivedParams, LatticeParams};

/// Uniform cell-centred grid on `[-p_max, p_max]` with an even number of
/// cells, so that p = 0 sits on the central face.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    p_max: f64,
    n: usize,
    dp: f64,
    centers: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub p_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(p_max: f64, n: usize) -> Result<Self, SolverError> {
        if !(p_max > 0.0) || !p_max.is_finite() {
            return Err(SolverError::InvalidGrid(format!(
                "p_max must be positive, got {p_max}"
            )));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(SolverError::InvalidGrid(format!(
                "n must be even and ≥ 4, got {n}"
            )));
        }
        let dp = 2.0 * p_max / n as f64;
        let centers = (0..n).map(|i| -p_max + (i as f64 + 0.5) * dp).collect();
        Ok(Self {
            p_max,
            n,
            dp,
            centers,
        })
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self, SolverError> {
        Self::new(spec.p_max, spec.n)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            p_max: self.p_max,
            n: self.n,
        }
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
    pub fn dp(&self) -> f64 {
        self.dp
    }
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Interior faces `p_{i+1/2}`, `i = 0..n-1`; the two boundary faces
    /// `±p_max` carry zero flux and are not listed.
    pub fn faces(&self) -> Vec<f64> {
        (1..self.n)
            .map(|i| -self.p_max + i as f64 * self.dp)
            .collect()
    }
}

/// A density sampled at the cell centres of a [`Grid`] at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    t: f64,
    values: Vec<f64>,
}

impl Field {
    /// Wraps values without renormalizing.
    pub fn from_values(grid: Grid, t: f64, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::GridMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { index, t });
        }
        Ok(Self { grid, t, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self {
            grid,
            t: 0.0,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    /// `Σ w_i dp`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dp
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid
            .centers
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialProfile {
    /// Centred Gaussian with standard deviation `width`.
    Gaussian {
        width: f64,
    },
    Tsallis(DerivedParams),
    Custom(Vec<f64>),
}

/// Serializable choice of initial profile for config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Gaussian {
        width: f64,
    },
    /// The Tsallis stationary state of the run's parameters.
    Stationary,
}

impl ProfileSpec {
    pub fn to_profile(&self, params: &LatticeParams) -> Result<InitialProfile, SolverError> {
        match *self {
            ProfileSpec::Gaussian { width } => Ok(InitialProfile::Gaussian { width }),
            ProfileSpec::Stationary => derive_params(params)
                .map(InitialProfile::Tsallis)
                .map_err(|e| SolverError::InvalidProfile(format!("no stationary state: {e}"))),
        }
    }
}

pub fn init_state(grid: &Grid, profile: &InitialProfile) -> Result<Field, SolverError> {
    let values: Vec<f64> = match profile {
        InitialProfile::Gaussian { width } => {
            if !(*width > 0.0) {
                return Err(SolverError::InvalidProfile(format!(
                    "width must be positive, got {width}"
                )));
            }
            grid.centers()
                .iter()
                .map(|p| (-0.5 * (p / width).powi(2)).exp())
                .collect()
        }
        InitialProfile::Tsallis(d) => grid.centers().iter().map(|&p| d.density(p)).collect(),
        InitialProfile::Custom(values) => values.clone(),
    };
    if values.len() != grid.len() {
        return Err(SolverError::GridMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(SolverError::NegativeProfile { index, value });
    }
    let mut field = Field::from_values(grid.clone(), 0.0, values)?;
    let mass = field.mass();
    if !(mass > 0.0) {
        return Err(SolverError::InvalidProfile(
            "profile has zero mass on the grid".into(),
        ));
    }
    field.values.iter_mut().for_each(|v| *v /= mass);
    Ok(field)
}
