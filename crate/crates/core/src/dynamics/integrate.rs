use serde::{Deserialize, Serialize};

use super::matrix::{basic_matrix, PayoffMatrix3};
use super::replicator::{l1, replicator_derivative, PopulationState, Simplex3};
use crate::error::{Error, Result};

/// Fixed-step RK4 settings and the outcome classifier margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Stop once `|dx|_1 + |dy|_1` falls below this.
    pub derivative_tol: f64,
    pub max_steps: u64,
    pub class_margin: f64,
    /// Upper bound on `dt * spread`, where spread is the largest payoff
    /// range of the two matrices. Keeps RK4 inside its stability region
    /// when shaping inflates payoffs.
    pub step_cap: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            derivative_tol: 1e-10,
            max_steps: 2_000_000,
            class_margin: 0.05,
            step_cap: 2.0,
        }
    }
}

impl IntegratorConfig {
    /// Step actually taken for a pair of matrices.
    pub fn effective_dt(&self, mat_x: &PayoffMatrix3, mat_y: &PayoffMatrix3) -> f64 {
        let spread = mat_x.spread().max(mat_y.spread());
        if spread > 0.0 {
            self.dt.min(self.step_cap / spread)
        } else {
            self.dt
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Cooperative,
    NonCooperative,
    Unresolved,
}

/// Classify a pair of realised per-round true costs.
///
/// Cooperative: both strictly below the mutual-PST cost of 1 and the mean at
/// least `margin` below it. NonCooperative: both within `margin` of 1.
pub fn classify(cost_1: f64, cost_2: f64, margin: f64) -> Outcome {
    if cost_1 < 1.0 && cost_2 < 1.0 && 0.5 * (cost_1 + cost_2) < 1.0 - margin {
        Outcome::Cooperative
    } else if (cost_1 - 1.0).abs() <= margin && (cost_2 - 1.0).abs() <= margin {
        Outcome::NonCooperative
    } else {
        Outcome::Unresolved
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub final_state: PopulationState,
    pub outcome: Outcome,
    /// Expected per-round true cost of population 1 (basic game costs).
    pub realized_cost_1: f64,
    pub realized_cost_2: f64,
    pub steps_taken: u64,
    pub converged: bool,
    /// Extreme share values seen along the path, before renormalisation.
    pub min_share_before_renorm: f64,
    pub max_share_before_renorm: f64,
}

/// Expected true per-round costs `(xᵀ C y, yᵀ C x)` with `C` the basic cost
/// matrix.
pub fn realized_costs(state: &PopulationState, basic: &PayoffMatrix3) -> (f64, f64) {
    (
        -basic.bilinear(&state.x, &state.y),
        -basic.bilinear(&state.y, &state.x),
    )
}

#[inline]
fn axpy(base: &Simplex3, h: f64, k: &Simplex3) -> Simplex3 {
    [base[0] + h * k[0], base[1] + h * k[1], base[2] + h * k[2]]
}

#[inline]
fn renormalize(v: &mut Simplex3) {
    // Subnormal shares are flushed to zero; arithmetic on them is very slow.
    let c = v.map(|s| if s < f64::MIN_POSITIVE { 0.0 } else { s });
    let inv = 1.0 / (c[0] + c[1] + c[2]);
    *v = c.map(|s| s * inv);
}

/// Integrate the two-population replicator field with RK4 until the field's
/// L1 norm drops below `derivative_tol` or `max_steps` is reached.
pub fn integrate_trajectory(
    initial: &PopulationState,
    mat_x: &PayoffMatrix3,
    mat_y: &PayoffMatrix3,
    config: &IntegratorConfig,
) -> Result<TrajectoryResult> {
    if mat_x.params != mat_y.params {
        return Err(Error::Shape(
            "both populations must play the same underlying game".into(),
        ));
    }
    let h = config.effective_dt(mat_x, mat_y);
    let mut s = *initial;
    let mut converged = false;
    let mut steps = 0;
    let mut lo = s.x.iter().chain(&s.y).copied().fold(f64::INFINITY, f64::min);
    let mut hi = s.x.iter().chain(&s.y).copied().fold(f64::NEG_INFINITY, f64::max);

    while steps < config.max_steps {
        let (k1x, k1y) = replicator_derivative(&s, mat_x, mat_y);
        let norm = l1(&k1x) + l1(&k1y);
        if !norm.is_finite() {
            return Err(Error::Integration { step: steps });
        }
        if norm < config.derivative_tol {
            converged = true;
            break;
        }
        let s2 = PopulationState {
            x: axpy(&s.x, 0.5 * h, &k1x),
            y: axpy(&s.y, 0.5 * h, &k1y),
        };
        let (k2x, k2y) = replicator_derivative(&s2, mat_x, mat_y);
        let s3 = PopulationState {
            x: axpy(&s.x, 0.5 * h, &k2x),
            y: axpy(&s.y, 0.5 * h, &k2y),
        };
        let (k3x, k3y) = replicator_derivative(&s3, mat_x, mat_y);
        let s4 = PopulationState {
            x: axpy(&s.x, h, &k3x),
            y: axpy(&s.y, h, &k3y),
        };
        let (k4x, k4y) = replicator_derivative(&s4, mat_x, mat_y);
        for i in 0..3 {
            s.x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            s.y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
        steps += 1;
        let smin = s.x[0].min(s.x[1]).min(s.x[2]).min(s.y[0]).min(s.y[1]).min(s.y[2]);
        let smax = s.x[0].max(s.x[1]).max(s.x[2]).max(s.y[0]).max(s.y[1]).max(s.y[2]);
        if !(smin.is_finite() && smax.is_finite()) {
            return Err(Error::Integration { step: steps });
        }
        lo = lo.min(smin);
        hi = hi.max(smax);
        renormalize(&mut s.x);
        renormalize(&mut s.y);
    }

    let basic = basic_matrix(&mat_x.params);
    let (c1, c2) = realized_costs(&s, &basic);
    Ok(TrajectoryResult {
        final_state: s,
        outcome: classify(c1, c2, config.class_margin),
        realized_cost_1: c1,
        realized_cost_2: c2,
        steps_taken: steps,
        converged,
        min_share_before_renorm: lo,
        max_share_before_renorm: hi,
    })
}
