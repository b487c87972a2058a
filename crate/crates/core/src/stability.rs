//! Positive-recurrence tests.
//!
//! Three quantities are reported side by side:
//!
//! * the average drift `D* = pi* (A0* - A2*) 1` of the limiting jump chain,
//!   with `pi*` its stationary vector;
//! * the closed-form drift `D = sum_z [alpha_z (lambda_z - mu_z) + lambda_z xi_z]`;
//! * the traffic intensity `rho = sum_z lambda_z (alpha_z + xi_z) / sum_z mu_z alpha_z`.
//!
//! `D < 0` and `rho < 1` are the same condition. The verdict is taken from
//! `rho`; a sign disagreement between `D*` and `D` is reported, not resolved.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jump_chain::{compute_limits, JumpChainLimits};
use crate::linalg::{left_null_vector, max_abs, vec_mul, Matrix};
use crate::model::Model;

/// `|rho - 1|` below this is reported as a boundary case.
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Boundary,
}

impl Verdict {
    pub fn from_rho(rho: f64) -> Self {
        if (rho - 1.0).abs() < BOUNDARY_BAND {
            Verdict::Boundary
        } else if rho < 1.0 {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrafficIntensity {
    pub rho: f64,
    pub per_state: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub rho: f64,
    pub rho_per_state: Vec<f64>,
    pub closed_form_drift: f64,
    /// `None` when some retrial rate is zero.
    pub numerical_drift: Option<f64>,
    /// Per-state ratio sum evaluated at the decoupled (`Q = 0`) stationary vector.
    pub decoupled_drift: f64,
    pub pi_star: Option<Vec<f64>>,
    pub verdict: Verdict,
    /// `sign(D*) != sign(D)`.
    pub drift_sign_disagreement: bool,
}

/// Stationary vector of the limiting jump matrix.
pub fn solve_pi_star(limits: &JumpChainLimits) -> Result<Vec<f64>> {
    let n = limits.total.nrows();
    let g: Matrix = &limits.total - Matrix::identity(n, n);
    let mut pi = left_null_vector(&g, 1e-9)?;
    // round-off can leave tiny negatives on unreachable phases
    for p in pi.iter_mut() {
        if *p < 0.0 && *p > -1e-13 {
            *p = 0.0;
        }
    }
    Ok(pi)
}

pub fn numerical_drift(limits: &JumpChainLimits, pi_star: &[f64]) -> f64 {
    let diff = &limits.up - &limits.down;
    vec_mul(pi_star, &diff).iter().sum()
}

/// Residual `|| pi A* - pi ||_inf`.
pub fn pi_star_residual(limits: &JumpChainLimits, pi_star: &[f64]) -> f64 {
    let moved = vec_mul(pi_star, &limits.total);
    let diff: Vec<f64> = moved.iter().zip(pi_star).map(|(a, b)| a - b).collect();
    max_abs(&diff)
}

/// `(1/m) sum_z [alpha(lambda - mu) + lambda xi] / [alpha(lambda + 2mu + q) + xi(3alpha + lambda + q)]`.
///
/// This is the drift of the limiting jump chain when the environment is
/// frozen and every state is weighted equally. It coincides with
/// [`numerical_drift`] for `m = 1` only.
pub fn decoupled_drift(model: &Model) -> f64 {
    let m = model.env_states();
    let q = model.exit_rates();
    let (lambda, mu, xi, alpha) = (model.lambda(), model.mu(), model.xi(), model.alpha());
    let sum: f64 = (0..m)
        .map(|z| {
            let num = alpha[z] * (lambda[z] - mu[z]) + lambda[z] * xi[z];
            let den = alpha[z] * (lambda[z] + 2.0 * mu[z] + q[z]) + xi[z] * (3.0 * alpha[z] + lambda[z] + q[z]);
            num / den
        })
        .sum();
    sum / m as f64
}

pub fn closed_form_drift(model: &Model) -> f64 {
    (0..model.env_states())
        .map(|z| model.alpha()[z] * (model.lambda()[z] - model.mu()[z]) + model.lambda()[z] * model.xi()[z])
        .sum()
}

pub fn traffic_intensity(model: &Model) -> TrafficIntensity {
    let (lambda, mu, xi, alpha) = (model.lambda(), model.mu(), model.xi(), model.alpha());
    let m = model.env_states();
    let load: f64 = (0..m).map(|z| lambda[z] * (alpha[z] + xi[z])).sum();
    let capacity: f64 = (0..m).map(|z| mu[z] * alpha[z]).sum();
    TrafficIntensity {
        rho: load / capacity,
        per_state: (0..m).map(|z| lambda[z] / mu[z] * (1.0 + xi[z] / alpha[z])).collect(),
    }
}

pub fn analyze_stability(model: &Model) -> Result<StabilityReport> {
    let ti = traffic_intensity(model);
    let closed = closed_form_drift(model);
    let (pi_star, numerical) = if model.theta().iter().all(|&t| t > 0.0) {
        let limits = compute_limits(model)?;
        let pi = solve_pi_star(&limits)?;
        let d = numerical_drift(&limits, &pi);
        (Some(pi), Some(d))
    } else {
        (None, None)
    };
    let disagreement = numerical.map(|d| sign(d) != sign(closed)).unwrap_or(false);
    Ok(StabilityReport {
        rho: ti.rho,
        rho_per_state: ti.per_state,
        closed_form_drift: closed,
        numerical_drift: numerical,
        decoupled_drift: decoupled_drift(model),
        pi_star,
        verdict: Verdict::from_rho(ti.rho),
        drift_sign_disagreement: disagreement,
    })
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}
