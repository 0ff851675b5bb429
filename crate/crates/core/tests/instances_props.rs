use dslm_core::instances::{
    duration_cdf, duration_ks_test, generate_batch, generate_instance, GeneratorConfig,
};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = GeneratorConfig> {
    (any::<u64>(), 1usize..=5, 1usize..=3, 4usize..=30, 1usize..=3).prop_map(
        |(seed, n, k, horizon, pricing_slots)| {
            let mut c = GeneratorConfig {
                seed,
                n_consumers: n,
                appliances_per_consumer: k,
                horizon,
                ..Default::default()
            };
            c.price.pricing_slots = pricing_slots;
            c
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_are_valid(cfg in config()) {
        let inst = generate_instance(&cfg).unwrap();
        inst.validate().unwrap();
        prop_assert_eq!(inst.consumers.len(), cfg.n_consumers);
        for c in &inst.consumers {
            prop_assert_eq!(c.appliances.len(), cfg.appliances_per_consumer);
            for a in &c.appliances {
                prop_assert!(a.duration >= 1 && a.duration < cfg.horizon);
                prop_assert!(a.est <= a.pst && a.pst <= a.lst);
                prop_assert!(a.lst + a.duration < cfg.horizon);
                prop_assert!(cfg.power_catalog.contains(&a.power_kw));
                let [lo, hi] = cfg.inconvenience_range;
                prop_assert!(a.inconvenience_per_slot >= lo && a.inconvenience_per_slot <= hi);
            }
        }
        prop_assert_eq!(inst.price_table.slots.len(), cfg.price.pricing_slots);
        for bands in &inst.price_table.slots {
            for w in bands.windows(2) {
                prop_assert!(w[0].price_per_kwh <= w[1].price_per_kwh);
            }
        }
    }

    #[test]
    fn generation_is_deterministic(cfg in config()) {
        prop_assert_eq!(generate_instance(&cfg).unwrap(), generate_instance(&cfg).unwrap());
    }

    #[test]
    fn duration_cdf_is_a_cdf(sigma in 0.3f64..6.0, max in 1usize..40) {
        let mut prev = 0.0;
        for k in 1..=max {
            let f = duration_cdf(k, sigma, max);
            prop_assert!(f >= prev - 1e-15 && f <= 1.0 + 1e-15);
            prev = f;
        }
        prop_assert!((duration_cdf(max, sigma, max) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn batch_uses_consecutive_seeds() {
    let cfg = GeneratorConfig { seed: 40, ..Default::default() };
    let batch = generate_batch(&cfg, 3).unwrap();
    let third = generate_instance(&GeneratorConfig { seed: 42, ..cfg }).unwrap();
    assert_eq!(batch[2], third);
    assert_ne!(batch[0], batch[1]);
}

#[test]
fn durations_follow_discretised_rayleigh() {
    let (d, crit) = duration_ks_test(2.0, 23, 20_000, 9, 0.01);
    assert!(d < crit, "KS statistic {d} above {crit}");
}

#[test]
fn bad_config_reports_pointer() {
    let err = GeneratorConfig::from_json(r#"{"horizon": 1}"#).unwrap_err();
    assert_eq!(err.kind(), "parse");
    assert!(err.to_string().contains("/horizon"), "{err}");
    let err = GeneratorConfig::from_json(r#"{"n_consumers": 2, "typo": 1}"#).unwrap_err();
    assert_eq!(err.kind(), "parse");
}
