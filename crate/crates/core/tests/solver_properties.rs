mod common;

use std::borrow::Cow;

use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use retrial_inventory::linalg::{max_abs, spectral_radius, vec_mul, Matrix};
use retrial_inventory::solver::{
    assemble_steady_state, balance_residual, compute_rate_matrices, solve_boundary, solve_steady_state,
};
use retrial_inventory::{
    analyze, EnvironmentParams, Error, GeneratorBlocks, InventoryPolicy, LevelBlockSource, Model, ModelSpec,
    SolverOptions,
};

/// Blocks of `inner` with the retrial rate frozen at its level-1 value.
struct FrozenRetrial<'a>(GeneratorBlocks<'a>);

impl LevelBlockSource for FrozenRetrial<'_> {
    fn phases(&self) -> usize {
        self.0.phases()
    }
    fn up(&self, level: usize) -> Cow<'_, Matrix> {
        self.0.up(level)
    }
    fn local(&self, level: usize) -> Cow<'_, Matrix> {
        self.0.local(level.min(1))
    }
    fn down(&self, _level: usize) -> Cow<'_, Matrix> {
        self.0.down(1)
    }
}

fn small_model() -> Model {
    Model::new(ModelSpec {
        env: EnvironmentParams {
            states: 2,
            lambda: vec![0.4, 0.7],
            mu: vec![3.0, 2.5],
            xi: vec![0.2, 0.1],
            alpha: vec![2.0, 1.5],
            theta: vec![6.0, 4.0],
            generator: vec![vec![-1.0, 1.0], vec![2.0, -2.0]],
        },
        policy: InventoryPolicy::new(1, 3),
    })
    .unwrap()
}

#[test]
fn frozen_retrial_matches_fixed_point() {
    let model = small_model();
    let frozen = FrozenRetrial(GeneratorBlocks::new(&model));
    let (a0, a1, a2) = (
        frozen.up(1).into_owned(),
        frozen.local(1).into_owned(),
        frozen.down(1).into_owned(),
    );

    // positive recurrence of the level-independent chain: pi A0 1 < pi A2 1
    let a = &a0 + &a1 + &a2;
    let pi = retrial_inventory::linalg::left_null_vector(&a, 1e-10).unwrap();
    let up: f64 = vec_mul(&pi, &a0).iter().sum();
    let down: f64 = vec_mul(&pi, &a2).iter().sum();
    assert!(up < down, "{up} >= {down}");

    // minimal solution by fixed-point iteration from zero
    let n = a0.nrows();
    let mut r = Matrix::zeros(n, n);
    for _ in 0..20_000 {
        let next = -(&a0) * (&a1 + &r * &a2).try_inverse().unwrap();
        let diff = (&next - &r).amax();
        r = next;
        if diff < 1e-15 {
            break;
        }
    }

    let rates = compute_rate_matrices(&frozen, 300).unwrap();
    for level_rate in &rates[..100] {
        assert_abs_diff_eq!(*level_rate, r, epsilon = 1e-8);
    }
}

#[test]
fn fast_retrials_decay_like_mm1() {
    let model = Model::new(ModelSpec {
        env: EnvironmentParams {
            states: 1,
            lambda: vec![1.0],
            mu: vec![2.0],
            xi: vec![0.0],
            alpha: vec![1.0],
            theta: vec![1.0e4],
            generator: vec![vec![0.0]],
        },
        policy: InventoryPolicy::new(0, 1),
    })
    .unwrap();
    let rates = compute_rate_matrices(&GeneratorBlocks::new(&model), 80).unwrap();
    for level in [5usize, 20, 40] {
        let sr = spectral_radius(&rates[level], 2000);
        assert!((sr - 0.5).abs() < 1e-3, "level {level}: {sr}");
    }
}

#[test]
fn low_traffic_steady_state_properties() {
    let model = common::bundled("low_traffic");
    let blocks = GeneratorBlocks::new(&model);
    let rates = compute_rate_matrices(&blocks, 75).unwrap();
    assert!(rates.iter().all(|r| r.iter().all(|&v| v >= 0.0)));

    let p0 = solve_boundary(&blocks, &rates[0]).unwrap();
    assert!(p0.iter().all(|&v| v >= 0.0));
    let boundary = blocks.local(0).into_owned() + &rates[0] * blocks.down(1).as_ref();
    assert!(max_abs(&vec_mul(&p0, &boundary)) < 1e-9);

    let steady = assemble_steady_state(p0, rates, true);
    assert_abs_diff_eq!(steady.total_mass(), 1.0, epsilon = 1e-10);

    // p_R = p_0 R_0 ... R_{R-1}
    let mut product = steady.levels[0].clone();
    for (level, r) in steady.rate_matrices.iter().enumerate() {
        product = vec_mul(&product, r);
        for (a, b) in product.iter().zip(&steady.levels[level + 1]) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    assert!(balance_residual(&blocks, &steady) < 1e-8);

    let masses = steady.level_masses();
    let head: f64 = masses.iter().sum();
    assert!(head >= 0.999);
    assert!(steady.tail_mass_bound.unwrap() < 1e-3);
    // the closed top level holds the mass reflected back from above
    for w in masses[40..75].windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn high_traffic_tail_eventually_decreases() {
    let model = common::bundled("high_traffic");
    let opts = SolverOptions {
        truncation: 75,
        retain_rate_matrices: false,
    };
    let steady = solve_steady_state(&GeneratorBlocks::new(&model), &opts).unwrap();
    let masses = steady.level_masses();
    let peak = masses.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(peak < 60, "mode at {peak}");
    for w in masses[peak..70].windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn truncation_is_forgotten_near_the_boundary() {
    let model = common::bundled("low_traffic");
    let blocks = GeneratorBlocks::new(&model);
    let opts = |truncation| SolverOptions {
        truncation,
        retain_rate_matrices: false,
    };
    let short = solve_steady_state(&blocks, &opts(75)).unwrap();
    let long = solve_steady_state(&blocks, &opts(150)).unwrap();
    for level in 0..=37 {
        for (a, b) in short.levels[level].iter().zip(&long.levels[level]) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }
}

#[test]
fn unstable_model_is_refused() {
    let mut spec = retrial_inventory::scenario::bundled("low_traffic").unwrap().spec();
    spec.env.lambda.iter_mut().for_each(|l| *l *= 10.0);
    let model = Model::new(spec).unwrap();
    let err = analyze(&model, &SolverOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Unstable { rho } if rho > 1.0));
}

#[test]
fn generator_blocks_match_event_list() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let model = Model::new(common::random_spec(&mut rng, 2, 2, 0.7)).unwrap();
        let top = 6;
        let dense = common::dense_truncated_generator(&model, top);
        let blocks = GeneratorBlocks::new(&model);
        let w = blocks.phases();
        let mut assembled = Matrix::zeros(w * (top + 1), w * (top + 1));
        for level in 0..=top {
            let mut local = blocks.local(level).into_owned();
            if level == top {
                for (k, s) in retrial_inventory::linalg::row_sums(&blocks.up(level))
                    .into_iter()
                    .enumerate()
                {
                    local[(k, k)] += s;
                }
            } else {
                assembled
                    .view_mut((level * w, (level + 1) * w), (w, w))
                    .copy_from(blocks.up(level).as_ref());
            }
            assembled.view_mut((level * w, level * w), (w, w)).copy_from(&local);
            if level >= 1 {
                assembled
                    .view_mut((level * w, (level - 1) * w), (w, w))
                    .copy_from(blocks.down(level).as_ref());
            }
        }
        assert_abs_diff_eq!(assembled, dense, epsilon = 1e-12);
    }
}

#[test]
fn matches_dense_solve_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for top in [1usize, 2, 7, 30] {
        let model = Model::new(common::random_spec(&mut rng, 2, 2, 0.8)).unwrap();
        let solution = analyze(&model, &SolverOptions::with_truncation(top)).unwrap();
        let dense = common::dense_stationary(&common::dense_truncated_generator(&model, top));
        for (a, b) in solution.steady.levels.concat().iter().zip(&dense) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }
}
