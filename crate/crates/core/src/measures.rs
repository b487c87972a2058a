//! Long-run performance measures from a truncated steady state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{left_null_vector, Matrix};
use crate::model::{is_irreducible, Model};
use crate::solver::SteadyState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub p_idle: f64,
    pub p_busy: f64,
    pub p_failed: f64,
    /// `p_R` for `R = 0..=R*`.
    pub orbit_marginal: Vec<f64>,
    /// `p_I` for `I = s+1..=S`.
    pub inventory_marginal: Vec<f64>,
    #[serde(rename = "L_R")]
    pub l_r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub lambda_bar: f64,
    pub p_env: Vec<f64>,
    #[serde(rename = "W_R")]
    pub w_r: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "B_inv")]
    pub b_inv: f64,
    /// `(S + s + 1) / 2`, the mean of the uniform distribution on `s+1..=S`.
    #[serde(rename = "B_inv_uniform")]
    pub b_inv_uniform: f64,
    #[serde(rename = "D_S")]
    pub d_s: f64,
    pub truncation: usize,
    pub tail_mass_bound: Option<f64>,
}

/// Stationary vector of the environment generator.
pub fn env_stationary(q: &Matrix) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = q.row_iter().map(|r| r.iter().copied().collect()).collect();
    if !is_irreducible(&rows) {
        return Err(Error::Reducible);
    }
    let mut p = left_null_vector(q, 1e-10)?;
    for v in p.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok(p)
}

pub fn compute_report(steady: &SteadyState, model: &Model) -> Result<PerformanceReport> {
    let m = model.env_states();
    let policy = model.policy();
    let span = policy.span();

    let mut status = [0.0; 3];
    let mut inventory_marginal = vec![0.0; span];
    for p in &steady.levels {
        for (k, v) in p.iter().enumerate() {
            status[(k / m) % 3] += v;
            inventory_marginal[k / (3 * m)] += v;
        }
    }
    let orbit_marginal = steady.level_masses();
    let l_r: f64 = orbit_marginal.iter().enumerate().map(|(r, p)| r as f64 * p).sum();
    let p_busy = status[1];
    let l = l_r + p_busy;

    let p_env = env_stationary(model.generator())?;
    let lambda_bar: f64 = p_env.iter().zip(model.lambda()).map(|(p, l)| p * l).sum();
    let w_r = l_r / lambda_bar;
    let w = l / lambda_bar;
    let b_inv: f64 = policy
        .levels()
        .zip(&inventory_marginal)
        .map(|(i, p)| i as f64 * p)
        .sum();

    Ok(PerformanceReport {
        p_idle: status[0],
        p_busy,
        p_failed: status[2],
        orbit_marginal,
        inventory_marginal,
        l_r,
        l,
        lambda_bar,
        p_env,
        w_r,
        w,
        b_inv,
        b_inv_uniform: policy.mean_level(),
        d_s: span as f64 * w,
        truncation: steady.truncation,
        tail_mass_bound: steady.tail_mass_bound,
    })
}
