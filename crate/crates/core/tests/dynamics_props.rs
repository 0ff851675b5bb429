use dslm_core::dynamics::{
    basic_matrix, eigenvalues4, integrate_trajectory, intrinsic_matrix, jacobian_eigenvalues_coop,
    numeric_jacobian, replicator_derivative, sort_spectrum, IntegratorConfig, PopulationState, APA, PPA, PPP,
    STRATEGIES,
};
use dslm_core::game::{memory1_discounted_costs, RepeatedGameParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = RepeatedGameParams> {
    (0.01f64..2.0, 0.05f64..0.97).prop_map(|(p, d)| RepeatedGameParams::new(p, d).unwrap())
}

fn simplex() -> impl Strategy<Value = [f64; 3]> {
    (0.001f64..1.0, 0.001f64..1.0, 0.001f64..1.0).prop_map(|(a, b, c)| {
        let s = a + b + c;
        [a / s, b / s, c / s]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basic_matrix_is_negated_normalised_repeated_costs(g in params()) {
        let m = basic_matrix(&g);
        for i in 0..3 {
            for j in 0..3 {
                let c = memory1_discounted_costs(STRATEGIES[i], STRATEGIES[j], &g);
                prop_assert!((m.entries[i][j] + c.normalized_1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shaping_only_touches_turn_taking_cells(g in params(), omega in 1.0f64..2000.0) {
        let b = basic_matrix(&g);
        let s = intrinsic_matrix(&g, omega).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let diff = s.entries[i][j] - b.entries[i][j];
                if (i, j) == (PPA, APA) || (i, j) == (APA, PPA) {
                    prop_assert!((diff - omega * (1.0 - g.delta())).abs() < 1e-9);
                } else {
                    prop_assert_eq!(diff, 0.0);
                }
            }
        }
    }

    #[test]
    fn shaping_preserves_turn_taking_equilibrium(g in params(), omega in 1.0f64..2000.0) {
        // A pure equilibrium of the basic game stays one under shaping.
        let b = basic_matrix(&g);
        let s = intrinsic_matrix(&g, omega).unwrap();
        let is_eq = |m: &dslm_core::dynamics::PayoffMatrix3| {
            (0..3).all(|k| m.entries[k][APA] <= m.entries[PPA][APA])
                && (0..3).all(|k| m.entries[k][PPA] <= m.entries[APA][PPA])
        };
        if is_eq(&b) {
            prop_assert!(is_eq(&s));
        }
    }

    #[test]
    fn field_is_tangent_to_the_simplex(g in params(), x in simplex(), y in simplex()) {
        let m = basic_matrix(&g);
        let (dx, dy) = replicator_derivative(&PopulationState { x, y }, &m, &m);
        prop_assert!(dx.iter().sum::<f64>().abs() < 1e-12);
        prop_assert!(dy.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn trajectories_stay_in_the_simplex(
        g in params(), x in simplex(), y in simplex(), omega in prop::option::of(10.0f64..500.0)
    ) {
        let mx = basic_matrix(&g);
        let my = match omega {
            Some(w) => intrinsic_matrix(&g, w).unwrap(),
            None => mx,
        };
        let cfg = IntegratorConfig { max_steps: 20_000, ..Default::default() };
        let r = integrate_trajectory(&PopulationState { x, y }, &mx, &my, &cfg).unwrap();
        prop_assert!(r.min_share_before_renorm >= -1e-9, "{}", r.min_share_before_renorm);
        prop_assert!(r.max_share_before_renorm <= 1.0 + 1e-9);
        for v in [r.final_state.x, r.final_state.y] {
            prop_assert!(v.iter().all(|&s| (0.0..=1.0).contains(&s)));
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn corner_stability_iff_p_below_delta() {
    for pi in 1..16 {
        for di in 1..16 {
            let (p, d) = (pi as f64 * 0.0625 + 0.004, di as f64 * 0.0625);
            let g = RepeatedGameParams::new(p, d).unwrap();
            let closed = jacobian_eigenvalues_coop(&g);
            assert_eq!(closed.stable, p < d, "p={p} d={d}");

            let m = basic_matrix(&g);
            let numeric = eigenvalues4(&numeric_jacobian(&PopulationState::corner(PPA, APA), &m, &m));
            let mut expected = closed.eigenvalues.clone();
            sort_spectrum(&mut expected);
            for (a, b) in expected.iter().zip(&numeric) {
                assert!((a.re - b.re).abs() < 1e-6 && b.im.abs() < 1e-6, "p={p} d={d}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn mutual_pst_corner_is_a_rest_point() {
    let g = RepeatedGameParams::new(0.5, 0.7).unwrap();
    let m = basic_matrix(&g);
    let (dx, dy) = replicator_derivative(&PopulationState::corner(PPP, PPP), &m, &m);
    assert!(dx.iter().chain(&dy).all(|v| v.abs() < 1e-15));
}
