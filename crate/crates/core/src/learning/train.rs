use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::intrinsic::{
    gates_open, shaped_cost, update_moving_averages, EpisodeRecord, IntrinsicConfig, LearnerState,
};
use super::policy::{policy_gradient_step, sample_from, Batch, PolicyState};
use crate::dslm::{best_response, evaluate_schedule, Instance, PriceTable, Schedule, SearchBudget};
use crate::error::{from_json, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub seed: u64,
    /// Total episodes; the last batch may be partial.
    pub episodes: u64,
    pub batch_size: usize,
    pub days_per_episode: usize,
    pub learning_rate: f64,
    pub intrinsic: IntrinsicConfig,
    /// Episodes averaged for the final cost summary.
    pub final_window: usize,
    /// Largest admissible per-consumer action set.
    pub max_actions: u64,
    pub budget: SearchBudget,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            episodes: 2_000_000,
            batch_size: 10_000,
            days_per_episode: 2,
            learning_rate: 0.001,
            intrinsic: IntrinsicConfig::default(),
            final_window: 100,
            max_actions: 1_000_000,
            budget: SearchBudget::default(),
        }
    }
}

impl TrainConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: TrainConfig = from_json(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::param("episodes", "must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch_size", "must be >= 1"));
        }
        if self.days_per_episode == 0 {
            return Err(Error::param("days_per_episode", "must be >= 1"));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::param("learning_rate", "must be finite and > 0"));
        }
        if self.final_window == 0 {
            return Err(Error::param("final_window", "must be >= 1"));
        }
        self.intrinsic.validate()
    }
}

/// Statistics of one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Episodes completed after this batch.
    pub episode: u64,
    /// Mean system cost per day.
    pub system_cost: f64,
    /// Mean cost per day of each consumer.
    pub consumer_costs: Vec<f64>,
    /// Mean shaped episodic cost of each consumer.
    pub shaped_costs: Vec<f64>,
    /// Episodes in which a consumer's gates were all open, summed over
    /// consumers.
    pub gate_fires: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub rows: Vec<TraceRow>,
    /// Mean system cost per day over the last `final_window` episodes.
    pub final_system_cost: f64,
    pub final_consumer_costs: Vec<f64>,
    /// `final_action_counts[i][a]` over the last `final_window` episodes.
    pub final_action_counts: Vec<Vec<u64>>,
    pub policies: Vec<PolicyState>,
    pub learners: Vec<LearnerState>,
    /// Distinct day contexts seen in the instance stream.
    pub contexts: usize,
}

impl TrainingTrace {
    pub fn csv(&self) -> String {
        let n = self.final_consumer_costs.len();
        let mut out = String::from("episode,system_cost");
        for i in 0..n {
            let _ = write!(out, ",consumer_{i}_cost");
        }
        for i in 0..n {
            let _ = write!(out, ",consumer_{i}_shaped");
        }
        out.push_str(",gate_fires\n");
        for r in &self.rows {
            let _ = write!(out, "{},{}", r.episode, r.system_cost);
            for c in r.consumer_costs.iter().chain(&r.shaped_costs) {
                let _ = write!(out, ",{c}");
            }
            let _ = writeln!(out, ",{}", r.gate_fires);
        }
        out
    }
}

/// 64-bit FNV-1a hash of a day's price table.
pub fn day_context(table: &PriceTable) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: [u8; 8]| {
        for b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for bands in &table.slots {
        eat((bands.len() as u64).to_le_bytes());
        for b in bands {
            eat(b.volume_kw.unwrap_or(f64::INFINITY).to_bits().to_le_bytes());
            eat(b.price_per_kwh.to_bits().to_le_bytes());
        }
    }
    h
}

struct DayOutcome {
    total: Vec<f64>,
    energy: Vec<f64>,
    best: Vec<f64>,
    system: f64,
}

/// Per-consumer action spaces: the product of the appliance windows, decoded
/// with the last appliance varying fastest.
struct ActionSpace {
    windows: Vec<Vec<(usize, usize)>>,
    sizes: Vec<usize>,
}

impl ActionSpace {
    fn new(inst: &Instance, max_actions: u64) -> Result<Self> {
        let windows: Vec<Vec<(usize, usize)>> = inst
            .consumers
            .iter()
            .map(|c| c.appliances.iter().map(|a| (a.est, a.window_len())).collect())
            .collect();
        let mut sizes = Vec::with_capacity(windows.len());
        for w in &windows {
            let n = w.iter().fold(1u128, |acc, &(_, len)| acc.saturating_mul(len as u128));
            if n > max_actions as u128 {
                return Err(Error::BudgetExceeded {
                    required: n,
                    max_nodes: max_actions,
                });
            }
            sizes.push(n as usize);
        }
        Ok(Self { windows, sizes })
    }

    fn decode(&self, consumer: usize, mut action: usize) -> Vec<usize> {
        let w = &self.windows[consumer];
        let mut starts = vec![0; w.len()];
        for (j, &(est, len)) in w.iter().enumerate().rev() {
            starts[j] = est + action % len;
            action /= len;
        }
        starts
    }

    fn same_shape(&self, inst: &Instance) -> bool {
        inst.consumers.len() == self.windows.len()
            && inst.consumers.iter().zip(&self.windows).all(|(c, w)| {
                c.appliances.len() == w.len()
                    && c.appliances.iter().zip(w).all(|(a, &(est, len))| a.est == est && a.window_len() == len)
            })
    }
}

/// Train one independent learner per consumer. Day `d` of the run uses
/// `instances[d % instances.len()]`; every instance must give each consumer
/// the same appliance windows.
pub fn train(instances: &[Instance], config: &TrainConfig) -> Result<TrainingTrace> {
    config.validate()?;
    let Some(first) = instances.first() else {
        return Err(Error::Shape("empty instance stream".into()));
    };
    let space = ActionSpace::new(first, config.max_actions)?;
    for (k, inst) in instances.iter().enumerate() {
        inst.validate()?;
        if !space.same_shape(inst) {
            return Err(Error::Shape(format!(
                "instance {k} has different consumers or appliance windows than instance 0"
            )));
        }
    }

    let mut ids: HashMap<u64, usize> = HashMap::new();
    let inst_ctx: Vec<usize> = instances
        .iter()
        .map(|inst| {
            let n = ids.len();
            *ids.entry(day_context(&inst.price_table)).or_insert(n)
        })
        .collect();
    let n_ctx = ids.len();
    let n_cons = space.sizes.len();
    let days = config.days_per_episode;
    let ic = &config.intrinsic;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut policies: Vec<PolicyState> = space
        .sizes
        .iter()
        .map(|&n| PolicyState::uniform(n_ctx, n, config.learning_rate))
        .collect();
    let mut learners = vec![LearnerState::new(ic.omega); n_cons];
    let mut cache: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut outcomes: Vec<DayOutcome> = Vec::new();
    let mut rows = Vec::new();
    let mut recent: VecDeque<(f64, Vec<f64>, Vec<usize>)> = VecDeque::new();

    let mut done = 0u64;
    let mut joint = vec![0usize; n_cons];
    let mut own = vec![vec![0.0; days]; n_cons];
    let mut others = vec![vec![0.0; days]; n_cons];
    let mut best = vec![vec![0.0; days]; n_cons];
    while done < config.episodes {
        let size = (config.episodes - done).min(config.batch_size as u64) as usize;
        let probs: Vec<Vec<Vec<f64>>> = policies
            .iter()
            .map(|p| (0..n_ctx).map(|c| p.probs(c)).collect())
            .collect();
        let mut batches: Vec<Batch> = (0..n_cons)
            .map(|_| Batch {
                days,
                decisions: Vec::with_capacity(size * days),
                costs: Vec::with_capacity(size),
            })
            .collect();
        let mut r_e_sum = vec![0.0; n_cons];
        let mut r_o_sum = vec![0.0; n_cons];
        let mut day_cost_sum = vec![0.0; n_cons];
        let mut system_sum = 0.0;
        let mut fires = 0u64;

        for e in 0..size as u64 {
            let mut system = 0.0;
            let mut actions = Vec::with_capacity(n_cons * days);
            for k in 0..days {
                let day = (done + e) * days as u64 + k as u64;
                let idx = (day % instances.len() as u64) as usize;
                let ctx = inst_ctx[idx];
                for i in 0..n_cons {
                    joint[i] = sample_from(&probs[i][ctx], &mut rng);
                    batches[i].decisions.push((ctx, joint[i]));
                    actions.push(joint[i]);
                }
                let key = (idx, joint.clone());
                let slot = match cache.get(&key) {
                    Some(&s) => s,
                    None => {
                        let o = evaluate_day(&instances[idx], &space, &joint, &config.budget)?;
                        outcomes.push(o);
                        cache.insert(key, outcomes.len() - 1);
                        outcomes.len() - 1
                    }
                };
                let o = &outcomes[slot];
                let energy_total: f64 = o.energy.iter().sum();
                for i in 0..n_cons {
                    own[i][k] = o.total[i];
                    others[i][k] = energy_total - o.energy[i];
                    best[i][k] = o.best[i];
                }
                system += o.system;
            }
            let mut per_day = Vec::with_capacity(n_cons);
            for i in 0..n_cons {
                let rec = EpisodeRecord::from_days(&own[i], &others[i], &best[i]);
                if ic.enabled && gates_open(&rec, &learners[i], ic) {
                    fires += 1;
                }
                batches[i].costs.push(shaped_cost(&rec, &learners[i], ic));
                r_e_sum[i] += rec.r_e;
                r_o_sum[i] += rec.r_o;
                day_cost_sum[i] += rec.r_e / days as f64;
                per_day.push(rec.r_e / days as f64);
            }
            system_sum += system / days as f64;
            recent.push_back((system / days as f64, per_day, actions));
            if recent.len() > config.final_window {
                recent.pop_front();
            }
        }

        let n = size as f64;
        for i in 0..n_cons {
            policies[i] = policy_gradient_step(&policies[i], &batches[i])?;
            learners[i] = update_moving_averages(&learners[i], r_e_sum[i] / n, r_o_sum[i] / n, ic);
        }
        done += size as u64;
        rows.push(TraceRow {
            episode: done,
            system_cost: system_sum / n,
            consumer_costs: day_cost_sum.iter().map(|s| s / n).collect(),
            shaped_costs: batches.iter().map(|b| b.baseline()).collect(),
            gate_fires: fires,
        });
    }

    let w = recent.len() as f64;
    let mut final_action_counts: Vec<Vec<u64>> = space.sizes.iter().map(|&n| vec![0; n]).collect();
    for (_, _, actions) in &recent {
        for (j, &a) in actions.iter().enumerate() {
            final_action_counts[j % n_cons][a] += 1;
        }
    }
    Ok(TrainingTrace {
        rows,
        final_system_cost: recent.iter().map(|r| r.0).sum::<f64>() / w,
        final_consumer_costs: (0..n_cons)
            .map(|i| recent.iter().map(|r| r.1[i]).sum::<f64>() / w)
            .collect(),
        final_action_counts,
        policies,
        learners,
        contexts: n_ctx,
    })
}

fn evaluate_day(
    inst: &Instance,
    space: &ActionSpace,
    joint: &[usize],
    budget: &SearchBudget,
) -> Result<DayOutcome> {
    let schedule = Schedule {
        start: joint
            .iter()
            .enumerate()
            .map(|(i, &a)| space.decode(i, a))
            .collect(),
    };
    let b = evaluate_schedule(inst, &schedule)?;
    let best = (0..joint.len())
        .map(|i| best_response(inst, &schedule, i, budget).map(|(_, c)| c))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DayOutcome {
        total: b.consumers.iter().map(|c| c.total).collect(),
        energy: b.consumers.iter().map(|c| c.energy_cost).collect(),
        best,
        system: b.system_cost,
    })
}
