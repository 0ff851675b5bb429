//! Synthetic DSLM instances and the canonical two-consumer example.
//!
//! Batches use consecutive seeds: instance `k` of a batch generated from
//! `seed` is `generate_instance` with seed `seed + k`. Experiments that need
//! disjoint training and evaluation days draw them from disjoint seed ranges.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dslm::{Appliance, Consumer, Instance, PriceBand, PriceTable};
use crate::error::{from_json, Error, Result};

/// A price band whose unit price is drawn uniformly from `price_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandTemplate {
    #[serde(default)]
    pub volume_kw: Option<f64>,
    pub price_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriceTemplate {
    /// Number of independently drawn slot tables (1 = one table for the day).
    pub pricing_slots: usize,
    pub bands: Vec<BandTemplate>,
}

impl Default for PriceTemplate {
    fn default() -> Self {
        let band = |v: Option<f64>, lo: f64, hi: f64| BandTemplate {
            volume_kw: v,
            price_range: [lo, hi],
        };
        Self {
            pricing_slots: 1,
            bands: vec![
                band(Some(5.0), 4.0, 6.0),
                band(Some(10.0), 8.0, 12.0),
                band(None, 16.0, 24.0),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_consumers: usize,
    pub appliances_per_consumer: usize,
    pub horizon: usize,
    pub slot_length_hours: f64,
    /// Relative weight of each slot as a preferred start. Empty selects the
    /// bundled morning/evening profile.
    pub pst_weights: Vec<f64>,
    pub power_catalog: Vec<f64>,
    pub duration_rayleigh_sigma: f64,
    /// Fixed duration instead of a Rayleigh draw.
    pub duration_override: Option<usize>,
    pub inconvenience_range: [f64; 2],
    pub inconvenience_override: Option<f64>,
    /// Use the widest admissible window `[0, horizon - duration - 1]` instead
    /// of drawing `est` and `lst`.
    pub full_windows: bool,
    pub price: PriceTemplate,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_consumers: 2,
            appliances_per_consumer: 1,
            horizon: 24,
            slot_length_hours: 1.0,
            pst_weights: Vec::new(),
            power_catalog: vec![1.0, 2.0, 3.0, 5.0],
            duration_rayleigh_sigma: 2.0,
            duration_override: None,
            inconvenience_range: [0.0, 10.0],
            inconvenience_override: None,
            full_windows: false,
            price: PriceTemplate::default(),
        }
    }
}

/// Two-peaked preferred-start profile around 07:00 and 18:00 on a 24-slot
/// day, stretched to `horizon` slots.
pub fn default_pst_weights(horizon: usize) -> Vec<f64> {
    (0..horizon)
        .map(|t| {
            let hour = 24.0 * (t as f64 + 0.5) / horizon as f64;
            let bump = |c: f64, w: f64| (-0.5 * ((hour - c) / w).powi(2)).exp();
            0.05 + bump(7.0, 1.5) + 1.5 * bump(18.0, 2.0)
        })
        .collect()
}

impl GeneratorConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: GeneratorConfig = from_json(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::parse(format!("/{field}"), msg));
        if self.n_consumers == 0 {
            return bad("n_consumers", "must be >= 1");
        }
        if self.horizon < 2 {
            return bad("horizon", "must be >= 2");
        }
        if !self.slot_length_hours.is_finite() || self.slot_length_hours <= 0.0 {
            return bad("slot_length_hours", "must be finite and > 0");
        }
        if !self.pst_weights.is_empty() {
            if self.pst_weights.len() != self.horizon {
                return bad("pst_weights", "needs one weight per slot");
            }
            if self.pst_weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                || self.pst_weights.iter().sum::<f64>() <= 0.0
            {
                return bad("pst_weights", "weights must be finite, >= 0 and not all zero");
            }
        }
        if self.power_catalog.is_empty()
            || self.power_catalog.iter().any(|w| !w.is_finite() || *w <= 0.0)
        {
            return bad("power_catalog", "needs at least one finite power > 0");
        }
        if !self.duration_rayleigh_sigma.is_finite() || self.duration_rayleigh_sigma <= 0.0 {
            return bad("duration_rayleigh_sigma", "must be finite and > 0");
        }
        if let Some(d) = self.duration_override {
            if d == 0 || d >= self.horizon {
                return bad("duration_override", "must be in [1, horizon - 1]");
            }
        }
        let [lo, hi] = self.inconvenience_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return bad("inconvenience_range", "needs 0 <= lo <= hi");
        }
        if let Some(v) = self.inconvenience_override {
            if !v.is_finite() || v < 0.0 {
                return bad("inconvenience_override", "must be finite and >= 0");
            }
        }
        let p = &self.price;
        if p.pricing_slots == 0 {
            return bad("price/pricing_slots", "must be >= 1");
        }
        if p.bands.is_empty() {
            return bad("price/bands", "needs at least one band");
        }
        let mut prev = 0.0;
        for (j, b) in p.bands.iter().enumerate() {
            let last = j + 1 == p.bands.len();
            let [lo, hi] = b.price_range;
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(Error::parse(
                    format!("/price/bands/{j}/price_range"),
                    "needs 0 <= lo <= hi",
                ));
            }
            match (b.volume_kw, last) {
                (None, true) => {}
                (Some(v), false) if v.is_finite() && v > prev => prev = v,
                _ => {
                    return Err(Error::parse(
                        format!("/price/bands/{j}/volume_kw"),
                        "volumes must increase and only the last band is unbounded",
                    ))
                }
            }
        }
        Ok(())
    }
}

/// Rayleigh draw by inverse CDF, rounded up and clamped to `[1, max]`.
pub fn sample_duration<R: Rng + ?Sized>(rng: &mut R, sigma: f64, max: usize) -> usize {
    let u: f64 = rng.random();
    let x = sigma * (-2.0 * (1.0 - u).ln()).sqrt();
    (x.ceil() as usize).clamp(1, max)
}

/// CDF of [`sample_duration`] at integer `k`.
pub fn duration_cdf(k: usize, sigma: f64, max: usize) -> f64 {
    if k >= max {
        1.0
    } else if k == 0 {
        0.0
    } else {
        1.0 - (-((k * k) as f64) / (2.0 * sigma * sigma)).exp()
    }
}

pub fn generate_instance(config: &GeneratorConfig) -> Result<Instance> {
    config.validate()?;
    let h = config.horizon;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let weights = if config.pst_weights.is_empty() {
        default_pst_weights(h)
    } else {
        config.pst_weights.clone()
    };

    let mut consumers = Vec::with_capacity(config.n_consumers);
    for _ in 0..config.n_consumers {
        let mut appliances = Vec::with_capacity(config.appliances_per_consumer);
        for _ in 0..config.appliances_per_consumer {
            let duration = match config.duration_override {
                Some(d) => d,
                None => sample_duration(&mut rng, config.duration_rayleigh_sigma, h - 1),
            };
            // Starts must leave lst + duration < horizon.
            let last_start = h - duration - 1;
            let dist = WeightedIndex::new(&weights[..=last_start]).map_err(|_| {
                Error::Generation(format!(
                    "no preferred-start weight in slots 0..={last_start} for duration {duration}"
                ))
            })?;
            let pst = dist.sample(&mut rng);
            let power_kw = config.power_catalog[rng.random_range(0..config.power_catalog.len())];
            let (est, lst) = if config.full_windows {
                (0, last_start)
            } else {
                (rng.random_range(0..=pst), rng.random_range(pst..=last_start))
            };
            let [lo, hi] = config.inconvenience_range;
            let inconvenience_per_slot = match config.inconvenience_override {
                Some(v) => v,
                None => lo + (hi - lo) * rng.random::<f64>(),
            };
            appliances.push(Appliance {
                duration,
                power_kw,
                est,
                pst,
                lst,
                inconvenience_per_slot,
            });
        }
        consumers.push(Consumer { appliances });
    }

    let slots = (0..config.price.pricing_slots)
        .map(|_| {
            let mut floor = 0.0f64;
            config
                .price
                .bands
                .iter()
                .map(|b| {
                    let [lo, hi] = b.price_range;
                    let drawn = lo + (hi - lo) * rng.random::<f64>();
                    floor = floor.max(drawn);
                    PriceBand {
                        volume_kw: b.volume_kw,
                        price_per_kwh: floor,
                    }
                })
                .collect()
        })
        .collect();

    let inst = Instance {
        horizon: h,
        slot_length_hours: config.slot_length_hours,
        price_table: PriceTable { slots },
        consumers,
    };
    inst.validate()
        .map_err(|e| Error::Generation(format!("generated instance is invalid: {e}")))?;
    Ok(inst)
}

/// `count` instances with seeds `config.seed`, `config.seed + 1`, ...
pub fn generate_batch(config: &GeneratorConfig, count: usize) -> Result<Vec<Instance>> {
    (0..count as u64)
        .map(|k| {
            generate_instance(&GeneratorConfig {
                seed: config.seed.wrapping_add(k),
                ..config.clone()
            })
        })
        .collect()
}

/// Two identical consumers, one 5 kW appliance each running 10 hourly slots
/// with preferred start 2, window [0, 13] and $30 per slot of deviation, on a
/// 24-slot day priced at $5/kWh up to 5 kW and $10/kWh above.
pub fn example_instance_sec2() -> Instance {
    let appliance = Appliance {
        duration: 10,
        power_kw: 5.0,
        est: 0,
        pst: 2,
        lst: 13,
        inconvenience_per_slot: 30.0,
    };
    Instance {
        horizon: 24,
        slot_length_hours: 1.0,
        price_table: PriceTable::uniform(vec![
            PriceBand {
                volume_kw: Some(5.0),
                price_per_kwh: 5.0,
            },
            PriceBand {
                volume_kw: None,
                price_per_kwh: 10.0,
            },
        ]),
        consumers: vec![
            Consumer {
                appliances: vec![appliance.clone()],
            };
            2
        ],
    }
}

/// One-sided Kolmogorov-Smirnov check of `n` duration draws against the
/// discretised Rayleigh law. Returns the statistic and the critical value at
/// significance `alpha`.
pub fn duration_ks_test(sigma: f64, max: usize, n: usize, seed: u64, alpha: f64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; max + 1];
    for _ in 0..n {
        counts[sample_duration(&mut rng, sigma, max)] += 1;
    }
    let mut seen = 0;
    let mut d: f64 = 0.0;
    for (k, c) in counts.iter().enumerate() {
        seen += c;
        let empirical = seen as f64 / n as f64;
        d = d.max(empirical - duration_cdf(k, sigma, max));
    }
    (d, (-alpha.ln() / (2.0 * n as f64)).sqrt())
}

/// CSV manifest rows `(file, seed)` for a generated batch.
pub fn manifest_csv(config: &GeneratorConfig, files: &[(String, u64)]) -> String {
    let mut out = String::from("file,seed,n_consumers,appliances_per_consumer,horizon\n");
    for (file, seed) in files {
        out.push_str(&format!(
            "{file},{seed},{},{},{}\n",
            config.n_consumers, config.appliances_per_consumer, config.horizon
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_json() {
        let cfg = GeneratorConfig {
            seed: 11,
            n_consumers: 4,
            appliances_per_consumer: 2,
            ..Default::default()
        };
        let a = generate_instance(&cfg).unwrap().to_json();
        let b = generate_instance(&cfg).unwrap().to_json();
        assert_eq!(a, b);
        let c = generate_instance(&GeneratorConfig { seed: 12, ..cfg }).unwrap().to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn worked_example_recipe() {
        let mut w = vec![0.0; 24];
        w[2] = 1.0;
        let cfg = GeneratorConfig {
            pst_weights: w,
            power_catalog: vec![5.0],
            duration_override: Some(10),
            inconvenience_override: Some(30.0),
            full_windows: true,
            ..Default::default()
        };
        let mut inst = generate_instance(&cfg).unwrap();
        let reference = example_instance_sec2();
        assert_eq!(inst.consumers, reference.consumers);
        inst.price_table = reference.price_table.clone();
        assert_eq!(inst, reference);
    }

    #[test]
    fn windows_hold_over_many_samples() {
        let cfg = GeneratorConfig {
            seed: 5,
            n_consumers: 50,
            appliances_per_consumer: 20,
            duration_rayleigh_sigma: 4.0,
            ..Default::default()
        };
        let inst = generate_instance(&cfg).unwrap();
        assert_eq!(inst.appliance_count(), 1000);
        for a in inst.consumers.iter().flat_map(|c| &c.appliances) {
            assert!(a.est <= a.pst && a.pst <= a.lst);
            assert!(a.lst + a.duration < inst.horizon);
            assert!((0.0..=10.0).contains(&a.inconvenience_per_slot));
        }
    }

    #[test]
    fn infeasible_profile_is_reported() {
        let mut w = vec![0.0; 24];
        w[20] = 1.0;
        let cfg = GeneratorConfig {
            pst_weights: w,
            duration_override: Some(10),
            ..Default::default()
        };
        assert!(matches!(generate_instance(&cfg), Err(Error::Generation(_))));
    }

    #[test]
    fn config_errors_point_at_field() {
        let err = GeneratorConfig::from_json(r#"{"horizon": 1}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { ref pointer, .. } if pointer == "/horizon"));
        let err = GeneratorConfig::from_json(r#"{"price": {"bands": [{"price_range": [1, "x"]}]}}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { ref pointer, .. } if pointer.starts_with("/price/bands/0/price_range")));
    }

    #[test]
    fn duration_law_passes_ks() {
        let (d, crit) = duration_ks_test(3.0, 23, 10_000, 1, 0.01);
        assert!(d < crit, "{d} >= {crit}");
    }

    #[test]
    fn cdf_edges() {
        assert_eq!(duration_cdf(0, 2.0, 10), 0.0);
        assert_eq!(duration_cdf(10, 2.0, 10), 1.0);
        assert!((duration_cdf(2, 2.0, 10) - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn batches_use_consecutive_seeds() {
        let cfg = GeneratorConfig {
            seed: 40,
            ..Default::default()
        };
        let batch = generate_batch(&cfg, 3).unwrap();
        let third = generate_instance(&GeneratorConfig {
            seed: 42,
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(batch[2], third);
        let m = manifest_csv(&cfg, &[("a.json".into(), 40)]);
        assert_eq!(m.lines().nth(1), Some("a.json,40,2,1,24"));
    }
}
