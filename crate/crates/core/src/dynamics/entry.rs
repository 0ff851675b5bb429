use serde::{Deserialize, Serialize};

use super::basin::{basin_monte_carlo, BasinSummary};
use super::integrate::IntegratorConfig;
use super::matrix::{basic_matrix, intrinsic_matrix};
use crate::error::Result;
use crate::game::RepeatedGameParams;

/// Adoption scenarios at one continuation probability. Population 1 is the
/// non-adopter in the asymmetric case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryPoint {
    pub delta: f64,
    pub basic_basic: BasinSummary,
    pub intrinsic_intrinsic: BasinSummary,
    pub basic_intrinsic: BasinSummary,
}

impl EntryPoint {
    pub fn scenarios(&self) -> [(&'static str, &BasinSummary); 3] {
        [
            ("basic_basic", &self.basic_basic),
            ("intrinsic_intrinsic", &self.intrinsic_intrinsic),
            ("basic_intrinsic", &self.basic_intrinsic),
        ]
    }
}

/// For every `delta` in the grid, run the two symmetric baselines and the
/// asymmetric basic-vs-intrinsic population pair.
pub fn entry_analysis(
    p: f64,
    omega: f64,
    delta_grid: &[f64],
    n_runs: usize,
    seed: u64,
    config: &IntegratorConfig,
) -> Result<Vec<EntryPoint>> {
    delta_grid
        .iter()
        .map(|&delta| {
            let params = RepeatedGameParams::new(p, delta)?;
            let basic = basic_matrix(&params);
            let shaped = intrinsic_matrix(&params, omega)?;
            Ok(EntryPoint {
                delta,
                basic_basic: basin_monte_carlo(&basic, &basic, n_runs, seed, config)?,
                intrinsic_intrinsic: basin_monte_carlo(&shaped, &shaped, n_runs, seed, config)?,
                basic_intrinsic: basin_monte_carlo(&basic, &shaped, n_runs, seed, config)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_delta() {
        let cfg = IntegratorConfig::default();
        assert!(entry_analysis(0.5, 100.0, &[1.2], 1, 0, &cfg).is_err());
        assert!(entry_analysis(0.5, 0.0, &[0.5], 1, 0, &cfg).is_err());
    }

    #[test]
    fn small_grid_runs() {
        let cfg = IntegratorConfig::default();
        let pts = entry_analysis(0.5, 100.0, &[0.7, 0.95], 8, 5, &cfg).unwrap();
        assert_eq!(pts.len(), 2);
        for pt in &pts {
            for (_, s) in pt.scenarios() {
                assert_eq!(s.counts.total(), 8);
            }
            assert_eq!(pt.basic_intrinsic.omega(), 100.0);
            assert_eq!(pt.basic_basic.omega(), 0.0);
        }
    }
}
