use serde::{Deserialize, Serialize};

use crate::dslm::tol;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntrinsicConfig {
    pub enabled: bool,
    pub omega: f64,
    pub mu: f64,
    /// Snapshot period of `P_A`, in updates.
    pub m: u64,
    /// Smoothing factor of the moving averages.
    pub ema_beta: f64,
    /// Require `A_E < P_A`. Disable to gate on the first three conditions only.
    pub trend_gate: bool,
}

impl Default for IntrinsicConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            omega: 1500.0,
            mu: 0.01,
            m: 1,
            ema_beta: 0.1,
            trend_gate: true,
        }
    }
}

impl IntrinsicConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(Error::param("omega", "must be finite and > 0"));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::param("mu", "must lie in [0, 1]"));
        }
        if self.m == 0 {
            return Err(Error::param("m", "must be >= 1"));
        }
        if !(self.ema_beta > 0.0 && self.ema_beta <= 1.0) {
            return Err(Error::param("ema_beta", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Running statistics of one learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    /// Moving average of own episodic cost.
    pub a_e: f64,
    /// Moving average of the others' episodic energy cost.
    pub a_o: f64,
    /// Snapshot of `a_e`.
    pub p_a: f64,
    pub update_count: u64,
}

impl LearnerState {
    pub fn new(omega: f64) -> Self {
        Self {
            a_e: omega,
            a_o: omega,
            p_a: omega,
            update_count: 0,
        }
    }
}

/// `Ω · CoC / R_E`.
pub fn intrinsic_term(coc: f64, r_e: f64, omega: f64) -> Result<f64> {
    if r_e.is_nan() || r_e <= 0.0 {
        return Err(Error::param("r_e", format!("episodic cost must be > 0, got {r_e}")));
    }
    Ok(omega * coc / r_e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// Own episodic cost.
    pub r_e: f64,
    /// Others' episodic energy cost.
    pub r_o: f64,
    /// Best-response cost per day.
    pub r_b: Vec<f64>,
    pub coc: f64,
    pub i_e: f64,
    pub r_new: f64,
}

impl EpisodeRecord {
    /// Accumulate an episode from per-day own costs, others' energy costs and
    /// best-response costs. `i_e` and `r_new` are left at 0 and `r_e`.
    pub fn from_days(own: &[f64], others: &[f64], best: &[f64]) -> Self {
        let r_e: f64 = own.iter().sum();
        let coc = own
            .iter()
            .zip(best)
            .map(|(&c, &b)| if c - b > tol(c) { c - b } else { 0.0 })
            .sum();
        Self {
            r_e,
            r_o: others.iter().sum(),
            r_b: best.to_vec(),
            coc,
            i_e: 0.0,
            r_new: r_e,
        }
    }
}

pub fn gates_open(record: &EpisodeRecord, learner: &LearnerState, config: &IntrinsicConfig) -> bool {
    record.coc > 0.0
        && record.r_o < learner.a_o
        && record.r_e < learner.a_e
        && (!config.trend_gate || learner.a_e < learner.p_a)
}

/// `μ·R_E − (1−μ)·I_E` when shaping is enabled and every gate is open,
/// otherwise `R_E`.
pub fn shaped_cost(record: &EpisodeRecord, learner: &LearnerState, config: &IntrinsicConfig) -> f64 {
    if !config.enabled || record.r_e <= 0.0 || !gates_open(record, learner, config) {
        return record.r_e;
    }
    let i_e = config.omega * record.coc / record.r_e;
    config.mu * record.r_e - (1.0 - config.mu) * i_e
}

/// One batch update with the batch means of `R_E` and `R_O`. When the new
/// update count is a multiple of `m`, `P_A` takes the value `A_E` had before
/// this update, so with `m = 1` the trend gate asks whether `A_E` just fell.
pub fn update_moving_averages(
    learner: &LearnerState,
    r_e: f64,
    r_o: f64,
    config: &IntrinsicConfig,
) -> LearnerState {
    let b = config.ema_beta;
    let update_count = learner.update_count + 1;
    LearnerState {
        a_e: (1.0 - b) * learner.a_e + b * r_e,
        a_o: (1.0 - b) * learner.a_o + b * r_o,
        p_a: if update_count.is_multiple_of(config.m) {
            learner.a_e
        } else {
            learner.p_a
        },
        update_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(r_e: f64, r_o: f64, coc: f64) -> EpisodeRecord {
        EpisodeRecord {
            r_e,
            r_o,
            r_b: vec![],
            coc,
            i_e: 0.0,
            r_new: r_e,
        }
    }

    #[test]
    fn intrinsic_values() {
        assert!((intrinsic_term(50.0, 550.0, 1500.0).unwrap() - 136.36363636363637).abs() < 1e-12);
        assert_eq!(intrinsic_term(0.0, 550.0, 1500.0).unwrap(), 0.0);
        assert_eq!(intrinsic_term(7.0, 7.0, 500.0).unwrap(), 500.0);
        assert!(intrinsic_term(1.0, 0.0, 500.0).is_err());
    }

    #[test]
    fn shaping_when_gated_in() {
        let cfg = IntrinsicConfig::default();
        let learner = LearnerState {
            a_e: 1000.0,
            a_o: 1000.0,
            p_a: 1100.0,
            update_count: 3,
        };
        let r = rec(550.0, 500.0, 50.0);
        let s = shaped_cost(&r, &learner, &cfg);
        assert!((s - (0.01 * 550.0 - 0.99 * 1500.0 * 50.0 / 550.0)).abs() < 1e-9);
        assert!((s + 129.5).abs() < 0.05);

        assert_eq!(shaped_cost(&rec(550.0, 500.0, 0.0), &learner, &cfg), 550.0);
        let mu1 = IntrinsicConfig { mu: 1.0, ..cfg };
        assert_eq!(shaped_cost(&r, &learner, &mu1), 550.0);
        let off = IntrinsicConfig { enabled: false, ..cfg };
        assert_eq!(shaped_cost(&r, &learner, &off), 550.0);
    }

    #[test]
    fn each_gate_can_close() {
        let cfg = IntrinsicConfig::default();
        let open = LearnerState {
            a_e: 1000.0,
            a_o: 1000.0,
            p_a: 1100.0,
            update_count: 0,
        };
        let r = rec(550.0, 500.0, 50.0);
        assert!(gates_open(&r, &open, &cfg));
        assert!(!gates_open(&rec(550.0, 1000.0, 50.0), &open, &cfg));
        assert!(!gates_open(&rec(1000.0, 500.0, 50.0), &open, &cfg));
        let flat = LearnerState { p_a: 1000.0, ..open };
        assert!(!gates_open(&r, &flat, &cfg));
        let three = IntrinsicConfig {
            trend_gate: false,
            ..cfg
        };
        assert!(gates_open(&r, &flat, &three));
    }

    #[test]
    fn moving_averages() {
        let cfg = IntrinsicConfig::default();
        let s0 = LearnerState::new(1500.0);
        let s1 = update_moving_averages(&s0, 550.0, 1000.0, &cfg);
        assert_eq!(s1.a_e, 1405.0);
        assert_eq!(s1.a_o, 1450.0);
        assert_eq!(s1.p_a, 1500.0);
        let s2 = update_moving_averages(&s1, 550.0, 1000.0, &cfg);
        assert_eq!(s2.p_a, s1.a_e);

        let mut s = s0;
        for _ in 0..500 {
            s = update_moving_averages(&s, 800.0, 300.0, &cfg);
        }
        assert!((s.a_e - 800.0).abs() < 1e-9);

        let m3 = IntrinsicConfig { m: 3, ..cfg };
        let mut s = s0;
        let mut snaps = vec![];
        for k in 0..6 {
            let prev = s;
            s = update_moving_averages(&s, 100.0 * k as f64, 0.0, &m3);
            if s.p_a != prev.p_a {
                assert_eq!(s.p_a, prev.a_e);
                snaps.push(s.update_count);
            }
        }
        assert_eq!(snaps, vec![3, 6]);
    }

    #[test]
    fn record_accumulates_positive_parts() {
        let r = EpisodeRecord::from_days(&[550.0, 500.0], &[250.0, 500.0], &[500.0, 505.0]);
        assert_eq!(r.r_e, 1050.0);
        assert_eq!(r.r_o, 750.0);
        assert_eq!(r.coc, 50.0);
    }
}
