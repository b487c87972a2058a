mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use retrial_inventory::generator::build_level_blocks;
use retrial_inventory::jump_chain::compute_limits;
use retrial_inventory::linalg::row_sums;
use retrial_inventory::stability::{closed_form_drift, decoupled_drift, numerical_drift, solve_pi_star, BOUNDARY_BAND};
use retrial_inventory::{traffic_intensity, InventoryPolicy, Model, ModelSpec, PhaseIndex, ServerStatus};

fn spec_from_seed(seed: u64, m: usize, span: u32, rho: f64) -> ModelSpec {
    common::random_spec(&mut ChaCha8Rng::seed_from_u64(seed), m, span, rho)
}

fn scaled(spec: &ModelSpec, c: f64) -> ModelSpec {
    let mut out = spec.clone();
    let env = &mut out.env;
    for v in [
        &mut env.lambda,
        &mut env.mu,
        &mut env.xi,
        &mut env.alpha,
        &mut env.theta,
    ] {
        v.iter_mut().for_each(|x| *x *= c);
    }
    env.generator.iter_mut().flatten().for_each(|x| *x *= c);
    out
}

proptest! {
    #[test]
    fn phase_index_is_a_bijection(s in 0u32..20, span in 1u32..6, m in 1usize..6) {
        let idx = PhaseIndex::new(InventoryPolicy::new(s, s + span), m);
        prop_assert_eq!(idx.len(), span as usize * 3 * m);
        for k in 0..idx.len() {
            let p = idx.unindex(k).unwrap();
            prop_assert_eq!(idx.index(p.inventory, p.status, p.env).unwrap(), k);
        }
        for i in s + 1..=s + span {
            for status in ServerStatus::ALL {
                for z in 1..=m {
                    let k = idx.index(i, status, z).unwrap();
                    let p = idx.unindex(k).unwrap();
                    prop_assert_eq!((p.inventory, p.status, p.env), (i, status, z));
                }
            }
        }
        prop_assert!(idx.index(s, ServerStatus::Idle, 1).is_err());
        prop_assert!(idx.index(s + span + 1, ServerStatus::Idle, 1).is_err());
        prop_assert!(idx.index(s + 1, ServerStatus::Idle, m + 1).is_err());
    }

    #[test]
    fn time_rescaling_leaves_load_unchanged(seed in any::<u64>(), m in 1usize..6, rho in 0.1f64..3.0, c in 0.01f64..100.0) {
        let spec = spec_from_seed(seed, m, 2, rho);
        let a = Model::new(spec.clone()).unwrap();
        let b = Model::new(scaled(&spec, c)).unwrap();
        let (ta, tb) = (traffic_intensity(&a), traffic_intensity(&b));
        prop_assert!((ta.rho - tb.rho).abs() <= 1e-12 * ta.rho);
        for (x, y) in ta.per_state.iter().zip(&tb.per_state) {
            prop_assert!((x - y).abs() <= 1e-12 * x);
        }
        prop_assert_eq!(closed_form_drift(&a).signum(), closed_form_drift(&b).signum());
    }

    #[test]
    fn load_below_one_iff_negative_closed_drift(seed in any::<u64>(), m in 1usize..6, rho in 0.1f64..3.0) {
        let model = Model::new(spec_from_seed(seed, m, 1, rho)).unwrap();
        let r = traffic_intensity(&model).rho;
        prop_assume!((r - 1.0).abs() > BOUNDARY_BAND);
        prop_assert_eq!(r < 1.0, closed_form_drift(&model) < 0.0);
    }

    #[test]
    fn single_state_condition(lambda in 0.1f64..10.0, mu in 0.1f64..10.0, xi in 0.0f64..5.0, alpha in 0.1f64..5.0) {
        let spec = ModelSpec {
            env: retrial_inventory::EnvironmentParams {
                states: 1,
                lambda: vec![lambda],
                mu: vec![mu],
                xi: vec![xi],
                alpha: vec![alpha],
                theta: vec![1.0],
                generator: vec![vec![0.0]],
            },
            policy: InventoryPolicy::new(0, 2),
        };
        let model = Model::new(spec).unwrap();
        let r = traffic_intensity(&model).rho;
        prop_assume!((r - 1.0).abs() > BOUNDARY_BAND);
        prop_assert_eq!(r < 1.0, lambda * (alpha + xi) < mu * alpha);
        // one environment state: the jump-chain drift is the scalar ratio
        let limits = compute_limits(&model).unwrap();
        let pi = solve_pi_star(&limits).unwrap();
        let d = numerical_drift(&limits, &pi);
        prop_assert!((d - decoupled_drift(&model)).abs() < 1e-12);
        prop_assert_eq!(d < 0.0, r < 1.0);
    }

    #[test]
    fn generator_rows_vanish(seed in any::<u64>(), m in 1usize..5, span in 1u32..4, level in 0usize..500) {
        let model = Model::new(spec_from_seed(seed, m, span, 0.8)).unwrap();
        let b = build_level_blocks(&model, level);
        let mut total = b.local + b.up;
        if let Some(d) = b.down {
            total += d;
        }
        let scale = total.amax();
        for s in row_sums(&total) {
            prop_assert!(s.abs() <= 1e-13 * scale.max(1.0));
        }
    }

    #[test]
    fn limiting_jump_matrix_is_stochastic(seed in any::<u64>(), m in 1usize..6, span in 1u32..4) {
        let model = Model::new(spec_from_seed(seed, m, span, 1.2)).unwrap();
        let limits = compute_limits(&model).unwrap();
        for s in row_sums(&limits.total) {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
        prop_assert!(limits.total.iter().all(|&p| p >= 0.0));
    }
}
