use serde::{Deserialize, Serialize};

use super::matrix::PayoffMatrix3;
use crate::error::{Error, Result};

pub type Simplex3 = [f64; 3];

/// Strategy shares of the two populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub x: Simplex3,
    pub y: Simplex3,
}

const SIMPLEX_TOL: f64 = 1e-12;

fn check_simplex(name: &'static str, v: &Simplex3) -> Result<()> {
    let sum: f64 = v.iter().sum();
    if v.iter().any(|s| !s.is_finite() || *s < 0.0) || (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::param(name, format!("not on the simplex: {v:?}")));
    }
    Ok(())
}

impl PopulationState {
    pub fn new(x: Simplex3, y: Simplex3) -> Result<Self> {
        check_simplex("x", &x)?;
        check_simplex("y", &y)?;
        Ok(Self { x, y })
    }

    /// Pure-strategy corner `(i, j)`.
    pub fn corner(i: usize, j: usize) -> Self {
        let mut x = [0.0; 3];
        let mut y = [0.0; 3];
        x[i] = 1.0;
        y[j] = 1.0;
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }
}

/// Two-population replicator field. Each population uses its own matrix with
/// rows indexed by its own strategy:
///
/// `dx_i = x_i ((A y)_i - xᵀ A y)`, `dy_j = y_j ((C x)_j - yᵀ C x)`.
#[inline]
pub fn replicator_derivative(
    state: &PopulationState,
    mat_x: &PayoffMatrix3,
    mat_y: &PayoffMatrix3,
) -> (Simplex3, Simplex3) {
    (
        field(&state.x, &mat_x.apply(&state.y)),
        field(&state.y, &mat_y.apply(&state.x)),
    )
}

#[inline]
fn field(own: &Simplex3, fitness: &[f64; 3]) -> Simplex3 {
    let mean = own[0] * fitness[0] + own[1] * fitness[1] + own[2] * fitness[2];
    [
        own[0] * (fitness[0] - mean),
        own[1] * (fitness[1] - mean),
        own[2] * (fitness[2] - mean),
    ]
}

pub fn l1(v: &Simplex3) -> f64 {
    v.iter().map(|c| c.abs()).sum()
}
