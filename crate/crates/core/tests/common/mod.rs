#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use retrial_inventory::{EnvironmentParams, InventoryPolicy, Model, ModelSpec};

pub fn bundled(name: &str) -> Model {
    Model::new(retrial_inventory::scenario::bundled(name).unwrap().spec()).unwrap()
}

/// Dense irreducible generator with every off-diagonal rate positive.
pub fn random_generator<R: Rng>(rng: &mut R, m: usize) -> Vec<Vec<f64>> {
    let mut q = vec![vec![0.0; m]; m];
    for (i, row) in q.iter_mut().enumerate() {
        for (j, q_ij) in row.iter_mut().enumerate() {
            if i != j {
                *q_ij = rng.gen_range(0.1..5.0);
            }
        }
        row[i] = -row.iter().sum::<f64>();
    }
    q
}

/// Random spec whose traffic intensity equals `rho`.
pub fn random_spec<R: Rng>(rng: &mut R, m: usize, span: u32, rho: f64) -> ModelSpec {
    let mut draw = |lo: f64, hi: f64| (0..m).map(|_| rng.gen_range(lo..hi)).collect::<Vec<f64>>();
    let mut lambda = draw(0.2, 5.0);
    let mu = draw(0.5, 8.0);
    let xi = draw(0.01, 2.0);
    let alpha = draw(0.2, 6.0);
    let theta = draw(0.2, 5.0);
    let load: f64 = (0..m).map(|z| lambda[z] * (alpha[z] + xi[z])).sum();
    let capacity: f64 = (0..m).map(|z| mu[z] * alpha[z]).sum();
    let scale = rho * capacity / load;
    lambda.iter_mut().for_each(|l| *l *= scale);
    let generator = random_generator(rng, m);
    let s = rng.gen_range(0..4);
    ModelSpec {
        env: EnvironmentParams {
            states: m,
            lambda,
            mu,
            xi,
            alpha,
            theta,
            generator,
        },
        policy: InventoryPolicy::new(s, s + span),
    }
}

/// Generator of the chain truncated at orbit size `top`, written out state by
/// state from the event list. Arrivals and failures that would push the orbit
/// above `top` are dropped. States are ordered level by level, then
/// `((I - s - 1) * 3 + x) * m + z` with `x` = idle 0, busy 1, failed 2.
pub fn dense_truncated_generator(model: &Model, top: usize) -> DMatrix<f64> {
    let m = model.env_states();
    let policy = model.policy();
    let (s, cap) = (policy.reorder_level as usize, policy.capacity as usize);
    let width = 3 * m * (cap - s);
    let n = width * (top + 1);
    let idx = |r: usize, i: usize, x: usize, z: usize| r * width + ((i - s - 1) * 3 + x) * m + z;
    let (lambda, mu, xi, alpha, theta) = (model.lambda(), model.mu(), model.xi(), model.alpha(), model.theta());
    let q = model.generator();

    let mut g = DMatrix::zeros(n, n);
    let mut add = |from: usize, to: usize, rate: f64| {
        if rate > 0.0 && from != to {
            g[(from, to)] += rate;
            g[(from, from)] -= rate;
        }
    };
    for r in 0..=top {
        for i in s + 1..=cap {
            for x in 0..3 {
                for z in 0..m {
                    let here = idx(r, i, x, z);
                    for z2 in 0..m {
                        if z2 != z {
                            add(here, idx(r, i, x, z2), q[(z, z2)]);
                        }
                    }
                    let up = r < top;
                    match x {
                        0 => {
                            add(here, idx(r, i, 1, z), lambda[z]);
                            add(here, idx(r, i, 2, z), xi[z]);
                            if r > 0 {
                                add(here, idx(r - 1, i, 1, z), r as f64 * theta[z]);
                            }
                        }
                        1 => {
                            let next = if i == s + 1 { cap } else { i - 1 };
                            add(here, idx(r, next, 0, z), mu[z]);
                            if up {
                                add(here, idx(r + 1, i, 1, z), lambda[z]);
                                add(here, idx(r + 1, i, 2, z), xi[z]);
                            }
                        }
                        _ => {
                            add(here, idx(r, i, 0, z), alpha[z]);
                            if up {
                                add(here, idx(r + 1, i, 2, z), lambda[z]);
                            }
                        }
                    }
                }
            }
        }
    }
    g
}

/// Stationary vector of a dense generator: `p G = 0`, `p 1 = 1`.
pub fn dense_stationary(g: &DMatrix<f64>) -> Vec<f64> {
    let n = g.nrows();
    let mut a = g.transpose();
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::zeros(n);
    b[n - 1] = 1.0;
    let p = a.lu().solve(&b).expect("nonsingular stationary system");
    p.iter().copied().collect()
}
