use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrate::{integrate_trajectory, IntegratorConfig, Outcome};
use super::matrix::{MatrixKind, PayoffMatrix3};
use super::replicator::{PopulationState, Simplex3};
use crate::error::{Error, Result};

pub const HIST_BINS: usize = 10;

/// Run-private generator derived from `(seed, run_index)`.
pub fn run_rng(seed: u64, run_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

/// Uniform draw from the 2-simplex (symmetric Dirichlet, concentration 1).
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R) -> Simplex3 {
    let e: [f64; 3] = std::array::from_fn(|_| rng.sample(Exp1));
    let sum: f64 = e.iter().sum();
    e.map(|v| v / sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: u64,
    pub initial: PopulationState,
    pub final_state: Option<PopulationState>,
    pub outcome: Outcome,
    pub realized_cost_1: Option<f64>,
    pub realized_cost_2: Option<f64>,
    pub steps_taken: u64,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub cooperative: usize,
    pub non_cooperative: usize,
    pub unresolved: usize,
}

impl OutcomeCounts {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Cooperative => self.cooperative += 1,
            Outcome::NonCooperative => self.non_cooperative += 1,
            Outcome::Unresolved => self.unresolved += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.cooperative + self.non_cooperative + self.unresolved
    }
}

/// Aggregate of a batch of replicator runs from random initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinSummary {
    pub seed: u64,
    pub p: f64,
    pub delta: f64,
    pub kind_x: MatrixKind,
    pub kind_y: MatrixKind,
    pub config: IntegratorConfig,
    pub run_count: usize,
    pub counts: OutcomeCounts,
    pub failed_runs: usize,
    pub unconverged_runs: usize,
    /// Mean realised true cost over runs that finished without error.
    pub mean_cost_p1: f64,
    pub mean_cost_p2: f64,
    /// `hist_x[strategy][bin]`: final-share histograms over `[0, 1]`.
    pub hist_x: [[usize; HIST_BINS]; 3],
    pub hist_y: [[usize; HIST_BINS]; 3],
    #[serde(skip)]
    pub runs: Vec<RunRecord>,
}

impl BasinSummary {
    pub fn coop_fraction(&self) -> f64 {
        self.counts.cooperative as f64 / self.run_count as f64
    }

    pub fn noncoop_fraction(&self) -> f64 {
        self.counts.non_cooperative as f64 / self.run_count as f64
    }

    pub fn unresolved_fraction(&self) -> f64 {
        self.counts.unresolved as f64 / self.run_count as f64
    }

    /// Ω of population 2's matrix, else population 1's, else 0.
    pub fn omega(&self) -> f64 {
        match (self.kind_y, self.kind_x) {
            (MatrixKind::Intrinsic { omega }, _) | (_, MatrixKind::Intrinsic { omega }) => omega,
            _ => 0.0,
        }
    }

    pub const CSV_HEADER: &'static str = "seed,p,delta,omega,run_count,coop_fraction,noncoop_fraction,unresolved_fraction,mean_cost_p1,mean_cost_p2";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.p,
            self.delta,
            self.omega(),
            self.run_count,
            self.coop_fraction(),
            self.noncoop_fraction(),
            self.unresolved_fraction(),
            self.mean_cost_p1,
            self.mean_cost_p2
        )
    }
}

fn bin(share: f64) -> usize {
    ((share * HIST_BINS as f64) as usize).min(HIST_BINS - 1)
}

fn one_run(
    seed: u64,
    run_index: u64,
    mat_x: &PayoffMatrix3,
    mat_y: &PayoffMatrix3,
    config: &IntegratorConfig,
) -> RunRecord {
    let mut rng = run_rng(seed, run_index);
    let initial = PopulationState {
        x: sample_simplex(&mut rng),
        y: sample_simplex(&mut rng),
    };
    match integrate_trajectory(&initial, mat_x, mat_y, config) {
        Ok(r) => RunRecord {
            run_index,
            initial,
            final_state: Some(r.final_state),
            outcome: r.outcome,
            realized_cost_1: Some(r.realized_cost_1),
            realized_cost_2: Some(r.realized_cost_2),
            steps_taken: r.steps_taken,
            converged: r.converged,
            error: None,
        },
        Err(e) => RunRecord {
            run_index,
            initial,
            final_state: None,
            outcome: Outcome::Unresolved,
            realized_cost_1: None,
            realized_cost_2: None,
            steps_taken: match e {
                Error::Integration { step } => step,
                _ => 0,
            },
            converged: false,
            error: Some(e.to_string()),
        },
    }
}

/// Integrate `n_runs` independent uniformly random initial states and
/// summarise where they end up. Deterministic for a fixed seed; runs that
/// fail to integrate are counted as unresolved.
pub fn basin_monte_carlo(
    mat_x: &PayoffMatrix3,
    mat_y: &PayoffMatrix3,
    n_runs: usize,
    seed: u64,
    config: &IntegratorConfig,
) -> Result<BasinSummary> {
    if n_runs == 0 {
        return Err(Error::param("n_runs", "must be >= 1"));
    }
    if mat_x.params != mat_y.params {
        return Err(Error::Shape(
            "both populations must play the same underlying game".into(),
        ));
    }
    let runs: Vec<RunRecord> = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| one_run(seed, i, mat_x, mat_y, config))
        .collect();

    let mut counts = OutcomeCounts::default();
    let mut hist_x = [[0; HIST_BINS]; 3];
    let mut hist_y = [[0; HIST_BINS]; 3];
    let (mut sum1, mut sum2, mut ok) = (0.0, 0.0, 0usize);
    let mut failed = 0;
    let mut unconverged = 0;
    for r in &runs {
        counts.add(r.outcome);
        match (&r.final_state, r.realized_cost_1, r.realized_cost_2) {
            (Some(s), Some(c1), Some(c2)) => {
                for k in 0..3 {
                    hist_x[k][bin(s.x[k])] += 1;
                    hist_y[k][bin(s.y[k])] += 1;
                }
                sum1 += c1;
                sum2 += c2;
                ok += 1;
                if !r.converged {
                    unconverged += 1;
                }
            }
            _ => failed += 1,
        }
    }
    let mean = |s: f64| if ok > 0 { s / ok as f64 } else { f64::NAN };

    Ok(BasinSummary {
        seed,
        p: mat_x.params.p(),
        delta: mat_x.params.delta(),
        kind_x: mat_x.kind,
        kind_y: mat_y.kind,
        config: *config,
        run_count: n_runs,
        counts,
        failed_runs: failed,
        unconverged_runs: unconverged,
        mean_cost_p1: mean(sum1),
        mean_cost_p2: mean(sum2),
        hist_x,
        hist_y,
        runs,
    })
}
