use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tabular softmax policy: one row of logits per day context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    pub logits: Vec<Vec<f64>>,
    pub learning_rate: f64,
}

impl PolicyState {
    pub fn uniform(n_contexts: usize, n_actions: usize, learning_rate: f64) -> Self {
        Self {
            logits: vec![vec![0.0; n_actions]; n_contexts],
            learning_rate,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.logits.first().map_or(0, Vec::len)
    }

    pub fn probs(&self, context: usize) -> Vec<f64> {
        softmax(&self.logits[context])
    }

    pub fn sample<R: Rng + ?Sized>(&self, context: usize, rng: &mut R) -> usize {
        sample_from(&self.probs(context), rng)
    }
}

pub(crate) fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub(crate) fn sample_from<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Episodes of equal length: decision `k` of episode `e` is
/// `decisions[e * days + k]` as `(context, action)`, and `costs[e]` is the
/// (possibly shaped) episodic cost.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub days: usize,
    pub decisions: Vec<(usize, usize)>,
    pub costs: Vec<f64>,
}

impl Batch {
    pub fn baseline(&self) -> f64 {
        self.costs.iter().sum::<f64>() / self.costs.len() as f64
    }

    fn check(&self, policy: &PolicyState) -> Result<()> {
        if self.costs.is_empty() || self.days == 0 {
            return Err(Error::Training("empty batch".into()));
        }
        if self.decisions.len() != self.costs.len() * self.days {
            return Err(Error::Shape(format!(
                "{} decisions for {} episodes of {} days",
                self.decisions.len(),
                self.costs.len(),
                self.days
            )));
        }
        let n = policy.n_actions();
        if let Some(&(c, a)) = self
            .decisions
            .iter()
            .find(|&&(c, a)| c >= policy.logits.len() || a >= n)
        {
            return Err(Error::Shape(format!("decision (context {c}, action {a}) out of range")));
        }
        Ok(())
    }
}

/// `J(θ) = −(1/E) Σ_e (c_e − b) Σ_k log π_θ(a_ek | x_ek)`, whose gradient at
/// the current θ is the REINFORCE estimate of the expected-reward gradient
/// for reward `−c`.
pub fn surrogate_objective(policy: &PolicyState, batch: &Batch, baseline: f64) -> f64 {
    let log_probs: Vec<Vec<f64>> = (0..policy.logits.len())
        .map(|c| policy.probs(c).into_iter().map(f64::ln).collect())
        .collect();
    let mut j = 0.0;
    for (e, &cost) in batch.costs.iter().enumerate() {
        let lp: f64 = batch.decisions[e * batch.days..(e + 1) * batch.days]
            .iter()
            .map(|&(c, a)| log_probs[c][a])
            .sum();
        j -= (cost - baseline) * lp;
    }
    j / batch.costs.len() as f64
}

/// Analytic gradient of [`surrogate_objective`] with the batch-mean baseline.
pub fn policy_gradient(policy: &PolicyState, batch: &Batch) -> Result<Vec<Vec<f64>>> {
    batch.check(policy)?;
    let b = batch.baseline();
    let n_episodes = batch.costs.len() as f64;
    let mut grad = vec![vec![0.0; policy.n_actions()]; policy.logits.len()];
    let mut weight = vec![0.0; policy.logits.len()];
    for (e, &cost) in batch.costs.iter().enumerate() {
        let w = -(cost - b) / n_episodes;
        for &(c, a) in &batch.decisions[e * batch.days..(e + 1) * batch.days] {
            grad[c][a] += w;
            weight[c] += w;
        }
    }
    for (c, g) in grad.iter_mut().enumerate() {
        if weight[c] != 0.0 {
            for (gk, pk) in g.iter_mut().zip(policy.probs(c)) {
                *gk -= weight[c] * pk;
            }
        }
    }
    if grad.iter().flatten().any(|g| !g.is_finite()) {
        return Err(Error::Training(format!(
            "non-finite policy gradient (batch of {} episodes, baseline {b}, cost range [{}, {}])",
            batch.costs.len(),
            batch.costs.iter().copied().fold(f64::INFINITY, f64::min),
            batch.costs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )));
    }
    Ok(grad)
}

/// Gradient-ascent step on the expected reward `−cost`.
pub fn policy_gradient_step(policy: &PolicyState, batch: &Batch) -> Result<PolicyState> {
    let grad = policy_gradient(policy, batch)?;
    let mut next = policy.clone();
    for (row, g) in next.logits.iter_mut().zip(&grad) {
        for (z, gk) in row.iter_mut().zip(g) {
            *z += policy.learning_rate * gk;
        }
    }
    Ok(next)
}
