use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::intrinsic::IntrinsicConfig;
use super::train::{train, TrainConfig};
use crate::dslm::{solve_centralized, SearchBudget};
use crate::error::{from_json, Error, Result};
use crate::instances::{generate_instance, BandTemplate, GeneratorConfig, PriceTemplate};

/// Centralized optimum against selfish learners on generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapConfig {
    pub population_sizes: Vec<usize>,
    pub instances_per_size: usize,
    /// Instance `k` of population size `n` uses seed
    /// `generator.seed + 1000 * n + k`; `n_consumers` is overridden.
    pub generator: GeneratorConfig,
    /// Learner settings; shaping is always disabled.
    pub train: TrainConfig,
    pub budget: SearchBudget,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            population_sizes: vec![2, 3, 4, 5, 6],
            instances_per_size: 4,
            generator: GeneratorConfig {
                horizon: 12,
                pst_weights: vec![1.0, 2.0, 4.0, 2.0, 1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
                power_catalog: vec![2.0, 3.0, 5.0],
                duration_rayleigh_sigma: 2.0,
                price: PriceTemplate {
                    pricing_slots: 1,
                    bands: vec![
                        BandTemplate {
                            volume_kw: Some(5.0),
                            price_range: [1.0, 2.0],
                        },
                        BandTemplate {
                            volume_kw: Some(10.0),
                            price_range: [3.0, 5.0],
                        },
                        BandTemplate {
                            volume_kw: None,
                            price_range: [6.0, 10.0],
                        },
                    ],
                },
                ..Default::default()
            },
            train: TrainConfig {
                episodes: 1_000_000,
                batch_size: 1_000,
                learning_rate: 0.01,
                intrinsic: IntrinsicConfig {
                    enabled: false,
                    ..Default::default()
                },
                ..Default::default()
            },
            budget: SearchBudget::default(),
        }
    }
}

impl GapConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: GapConfig = from_json(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_sizes.is_empty() || self.population_sizes.contains(&0) {
            return Err(Error::parse("/population_sizes", "needs sizes >= 1"));
        }
        if self.instances_per_size == 0 {
            return Err(Error::parse("/instances_per_size", "must be >= 1"));
        }
        self.generator.validate()?;
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n_consumers: usize,
    pub seed: u64,
    /// Optimal system cost per day.
    pub centralized_cost: f64,
    /// Mean system cost per day of the selfish learners over their final
    /// window.
    pub decentralized_cost: f64,
    pub ratio: f64,
}

impl GapRow {
    pub const CSV_HEADER: &'static str = "n_consumers,seed,centralized_cost,decentralized_cost,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n_consumers, self.seed, self.centralized_cost, self.decentralized_cost, self.ratio
        )
    }
}

pub fn gap_experiment(config: &GapConfig) -> Result<Vec<GapRow>> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = config
        .population_sizes
        .iter()
        .flat_map(|&n| {
            (0..config.instances_per_size as u64)
                .map(move |k| (n, config.generator.seed.wrapping_add(1000 * n as u64 + k)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(n, seed)| {
            let inst = generate_instance(&GeneratorConfig {
                seed,
                n_consumers: n,
                ..config.generator.clone()
            })?;
            let (_, opt) = solve_centralized(&inst, &config.budget)?;
            let tc = TrainConfig {
                seed,
                intrinsic: IntrinsicConfig {
                    enabled: false,
                    ..config.train.intrinsic
                },
                ..config.train.clone()
            };
            let trace = train(std::slice::from_ref(&inst), &tc)?;
            Ok(GapRow {
                n_consumers: n,
                seed,
                centralized_cost: opt.system_cost,
                decentralized_cost: trace.final_system_cost,
                ratio: trace.final_system_cost / opt.system_cost,
            })
        })
        .collect()
}
