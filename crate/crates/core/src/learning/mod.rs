//! Day-granularity policy-gradient consumers and the conditional
//! intrinsic-reward cost modification.

mod gap;
mod intrinsic;
mod policy;
mod train;

pub use gap::{gap_experiment, GapConfig, GapRow};
pub use intrinsic::{
    gates_open, intrinsic_term, shaped_cost, update_moving_averages, EpisodeRecord,
    IntrinsicConfig, LearnerState,
};
pub use policy::{policy_gradient, policy_gradient_step, surrogate_objective, Batch, PolicyState};
pub use train::{day_context, train, TraceRow, TrainConfig, TrainingTrace};
