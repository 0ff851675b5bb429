use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::PayoffMatrix3;
use super::replicator::{replicator_derivative, PopulationState};
use crate::game::RepeatedGameParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    /// Every eigenvalue has a strictly negative real part.
    pub stable: bool,
}

impl StabilityReport {
    pub fn from_eigenvalues(eigenvalues: Vec<Complex64>) -> Self {
        let stable = eigenvalues.iter().all(|e| e.re < 0.0);
        Self { eigenvalues, stable }
    }
}

/// Closed-form spectrum of the reduced Jacobian at the turn-taking corners
/// (PPA, APA) and (APA, PPA) of the basic game.
pub fn jacobian_eigenvalues_coop(params: &RepeatedGameParams) -> StabilityReport {
    let (p, d) = (params.p(), params.delta());
    let e1 = (-2.0 - p - d) / (1.0 + d);
    let e2 = (p - d) / (1.0 + d);
    let e4 = (p - d) * d / (1.0 + d);
    StabilityReport::from_eigenvalues(
        [e1, e2, e2, e4].map(|v| Complex64::new(v, 0.0)).to_vec(),
    )
}

/// Reduced field in coordinates `(x1, x2, y1, y2)`, third shares eliminated.
fn reduced_field(z: &[f64; 4], mat_x: &PayoffMatrix3, mat_y: &PayoffMatrix3) -> [f64; 4] {
    let s = PopulationState {
        x: [z[0], z[1], 1.0 - z[0] - z[1]],
        y: [z[2], z[3], 1.0 - z[2] - z[3]],
    };
    let (dx, dy) = replicator_derivative(&s, mat_x, mat_y);
    [dx[0], dx[1], dy[0], dy[1]]
}

/// Central finite-difference Jacobian `J[i][k] = d f_i / d z_k` of the
/// reduced replicator field, step `1e-6`.
pub fn numeric_jacobian(
    state: &PopulationState,
    mat_x: &PayoffMatrix3,
    mat_y: &PayoffMatrix3,
) -> [[f64; 4]; 4] {
    const H: f64 = 1e-6;
    let z = [state.x[0], state.x[1], state.y[0], state.y[1]];
    let mut j = [[0.0; 4]; 4];
    for k in 0..4 {
        let mut up = z;
        let mut dn = z;
        up[k] += H;
        dn[k] -= H;
        let fu = reduced_field(&up, mat_x, mat_y);
        let fd = reduced_field(&dn, mat_x, mat_y);
        for i in 0..4 {
            j[i][k] = (fu[i] - fd[i]) / (2.0 * H);
        }
    }
    j
}

pub fn eigenvalues4(j: &[[f64; 4]; 4]) -> Vec<Complex64> {
    let m = Matrix4::from_fn(|r, c| j[r][c]);
    let mut ev: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    sort_spectrum(&mut ev);
    ev
}

/// Sort by real part, then imaginary part.
pub fn sort_spectrum(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::matrix::{basic_matrix, APA, PPA, PPP};

    fn g(p: f64, d: f64) -> RepeatedGameParams {
        RepeatedGameParams::new(p, d).unwrap()
    }

    #[test]
    fn closed_form_reference_values() {
        let r = jacobian_eigenvalues_coop(&g(0.5, 0.95));
        let re: Vec<f64> = r.eigenvalues.iter().map(|e| e.re).collect();
        assert!((re[0] + 1.769230769230769).abs() < 1e-9);
        assert!((re[1] + 0.230769230769231).abs() < 1e-9);
        assert_eq!(re[1], re[2]);
        assert!((re[3] + 0.219230769230769).abs() < 1e-9);
        assert!(r.stable);

        let r = jacobian_eigenvalues_coop(&g(0.5, 0.5));
        assert_eq!(r.eigenvalues[1].re, 0.0);
        assert_eq!(r.eigenvalues[3].re, 0.0);
        assert!(!r.stable);

        let r = jacobian_eigenvalues_coop(&g(0.8, 0.5));
        assert!((r.eigenvalues[1].re - 0.2).abs() < 1e-12);
        assert!(!r.stable);
    }

    #[test]
    fn numeric_matches_closed_form_at_turn_taking_corner() {
        let gp = g(0.5, 0.95);
        let m = basic_matrix(&gp);
        let mut closed = jacobian_eigenvalues_coop(&gp).eigenvalues;
        sort_spectrum(&mut closed);
        for (i, j) in [(PPA, APA), (APA, PPA)] {
            let ev = eigenvalues4(&numeric_jacobian(&PopulationState::corner(i, j), &m, &m));
            for (a, b) in ev.iter().zip(&closed) {
                assert!((a - b).norm() < 1e-5, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn mutual_ppp_has_neutral_direction() {
        let m = basic_matrix(&g(0.5, 0.95));
        let ev = eigenvalues4(&numeric_jacobian(&PopulationState::corner(PPP, PPP), &m, &m));
        assert!(ev.iter().any(|e| e.norm() < 1e-8), "{ev:?}");
    }

    #[test]
    fn constant_payoffs_give_zero_jacobian() {
        let mut m = basic_matrix(&g(0.5, 0.95));
        m.entries = [[2.0; 3]; 3];
        let s = PopulationState::new([0.2, 0.3, 0.5], [0.6, 0.1, 0.3]).unwrap();
        let j = numeric_jacobian(&s, &m, &m);
        assert!(j.iter().flatten().all(|v| v.abs() < 1e-9));
    }
}
