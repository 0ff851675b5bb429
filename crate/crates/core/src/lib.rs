//! Demand-side load management as a repeated social dilemma.
//!
//! * [`game`]: the 2x2 stage game and exact memory-1 repeated-game costs.
//! * [`dynamics`]: two-population replicator dynamics over {PPP, PPA, APA},
//!   basin Monte Carlo, stability analysis and adopter/non-adopter entry.
//! * [`dslm`]: appliances, merit-order pricing, an exact centralized solver
//!   and a best-response oracle.
//! * [`learning`]: tabular policy-gradient consumers with the conditional
//!   intrinsic-reward cost modification.
//! * [`instances`]: synthetic instance generation.

pub mod dslm;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod instances;
pub mod learning;

pub use error::{Error, Result};
