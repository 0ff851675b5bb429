use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Memory1Strategy, RepeatedGameParams};

/// Strategy order used by every 3x3 object in this module.
pub const STRATEGIES: [Memory1Strategy; 3] =
    [Memory1Strategy::PPP, Memory1Strategy::PPA, Memory1Strategy::APA];

pub const PPP: usize = 0;
pub const PPA: usize = 1;
pub const APA: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixKind {
    Basic,
    Intrinsic { omega: f64 },
}

/// Per-round payoffs (negated normalised costs) over [PPP, PPA, APA], row =
/// own strategy, column = opponent strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix3 {
    pub entries: [[f64; 3]; 3],
    pub kind: MatrixKind,
    pub params: RepeatedGameParams,
}

impl PayoffMatrix3 {
    /// `(A v)_i`.
    #[inline]
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let a = &self.entries;
        [
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
        ]
    }

    /// `uᵀ A v`.
    pub fn bilinear(&self, u: &[f64; 3], v: &[f64; 3]) -> f64 {
        let av = self.apply(v);
        u[0] * av[0] + u[1] * av[1] + u[2] * av[2]
    }

    /// Largest minus smallest entry.
    pub fn spread(&self) -> f64 {
        let flat = self.entries.iter().flatten();
        let max = flat.clone().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = flat.copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// Per-round costs of the repeated game restricted to {PPP, PPA, APA}.
fn basic_costs(params: &RepeatedGameParams) -> [[f64; 3]; 3] {
    let (p, d) = (params.p(), params.delta());
    [
        [1.0, 1.0, d],
        [1.0, 1.0, d * (1.0 + p) / (1.0 + d)],
        [(1.0 + p) * (1.0 - d) + d, (1.0 + p) / (1.0 + d), 2.0 + p],
    ]
}

pub fn basic_matrix(params: &RepeatedGameParams) -> PayoffMatrix3 {
    let c = basic_costs(params);
    PayoffMatrix3 {
        entries: c.map(|row| row.map(|v| -v)),
        kind: MatrixKind::Basic,
        params: *params,
    }
}

/// Basic matrix with the turn-taking costs (PPA vs APA and APA vs PPA) each
/// reduced by `omega * (1 - delta)`.
pub fn intrinsic_matrix(params: &RepeatedGameParams, omega: f64) -> Result<PayoffMatrix3> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::param("omega", format!("must be finite and > 0, got {omega}")));
    }
    let mut c = basic_costs(params);
    let bonus = omega * (1.0 - params.delta());
    c[PPA][APA] -= bonus;
    c[APA][PPA] -= bonus;
    Ok(PayoffMatrix3 {
        entries: c.map(|row| row.map(|v| -v)),
        kind: MatrixKind::Intrinsic { omega },
        params: *params,
    })
}
