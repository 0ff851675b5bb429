//! Two-population replicator dynamics over the strategies {PPP, PPA, APA}.
//!
//! Population 1 state `x`, population 2 state `y`; each population carries
//! its own payoff matrix so that adopters (intrinsic shaping) and
//! non-adopters (basic game) can be mixed. The single-population equation is
//! the special case `x = y` with identical matrices.
//!
//! Outcomes are judged by realised *true* per-round cost, evaluated with the
//! basic matrix, whatever matrices drove the dynamics.

mod basin;
mod entry;
mod integrate;
mod matrix;
mod replicator;
mod stability;

pub use basin::{
    basin_monte_carlo, run_rng, sample_simplex, BasinSummary, OutcomeCounts, RunRecord, HIST_BINS,
};
pub use entry::{entry_analysis, EntryPoint};
pub use integrate::{
    classify, integrate_trajectory, realized_costs, IntegratorConfig, Outcome, TrajectoryResult,
};
pub use matrix::{basic_matrix, intrinsic_matrix, MatrixKind, PayoffMatrix3, APA, PPA, PPP, STRATEGIES};
pub use replicator::{l1, replicator_derivative, PopulationState, Simplex3};
pub use stability::{
    eigenvalues4, jacobian_eigenvalues_coop, numeric_jacobian, sort_spectrum, StabilityReport,
};
