//! Exact event-by-event simulation of the system state `(R, I, X, Z)`.
//!
//! The next event is drawn from the competing exponential clocks of the
//! current state: one total-rate exponential for the holding time, then a
//! categorical pick among the events. Each replication uses `ChaCha8Rng`
//! seeded with the master seed and switched to stream `replication`, so
//! results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::{Model, ServerStatus, SystemState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    pub seed: u64,
    /// A replication whose orbit reaches this size is aborted.
    pub orbit_cap: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 2.0e5,
            warmup: 1.0e4,
            replications: 20,
            seed: 7305,
            orbit_cap: 10_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.horizon) {
            return Err(Error::InvalidArgument(format!(
                "warmup must lie in [0, horizon), got {} with horizon {}",
                self.warmup, self.horizon
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("at least one replication is required".into()));
        }
        if self.orbit_cap == 0 {
            return Err(Error::InvalidArgument("orbit cap must be positive".into()));
        }
        Ok(())
    }
}

/// Time averages from one replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationEstimate {
    pub replication: usize,
    pub p_idle: f64,
    pub p_busy: f64,
    pub p_failed: f64,
    #[serde(rename = "L_R")]
    pub l_r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Time average of the current arrival rate.
    pub lambda_bar: f64,
    #[serde(rename = "B_inv")]
    pub b_inv: f64,
    pub inventory_marginal: Vec<f64>,
    pub orbit_marginal: Vec<f64>,
    pub events: u64,
    pub max_orbit: u64,
}

impl ReplicationEstimate {
    pub fn w_r(&self) -> f64 {
        self.l_r / self.lambda_bar
    }

    pub fn w(&self) -> f64 {
        self.l / self.lambda_bar
    }
}

/// Replication mean with its 95% t half-width (`None` for one replication).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub half_width: Option<f64>,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self { mean, half_width: None };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        Self {
            mean,
            half_width: Some(t * (var / n as f64).sqrt()),
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        match self.half_width {
            Some(h) => (value - self.mean).abs() <= h,
            None => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEstimates {
    pub config: SimConfig,
    pub p_idle: Estimate,
    pub p_busy: Estimate,
    pub p_failed: Estimate,
    #[serde(rename = "L_R")]
    pub l_r: Estimate,
    #[serde(rename = "L")]
    pub l: Estimate,
    pub lambda_bar: Estimate,
    #[serde(rename = "W_R")]
    pub w_r: Estimate,
    #[serde(rename = "W")]
    pub w: Estimate,
    #[serde(rename = "B_inv")]
    pub b_inv: Estimate,
    #[serde(rename = "D_S")]
    pub d_s: Estimate,
    pub inventory_marginal: Vec<Estimate>,
    /// Up to the largest orbit size observed after warmup.
    pub orbit_marginal: Vec<Estimate>,
    pub replications: Vec<ReplicationEstimate>,
}

pub fn simulate(model: &Model, cfg: &SimConfig) -> Result<SimEstimates> {
    cfg.validate()?;
    let runs: Vec<Result<ReplicationEstimate>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(model, cfg, rep))
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarize(*cfg, model.policy().span(), runs))
}

fn summarize(config: SimConfig, span: usize, runs: Vec<ReplicationEstimate>) -> SimEstimates {
    let est = |f: &dyn Fn(&ReplicationEstimate) -> f64| Estimate::from_samples(&runs.iter().map(f).collect::<Vec<_>>());
    let marginal = |len: usize, f: &dyn Fn(&ReplicationEstimate) -> &Vec<f64>| -> Vec<Estimate> {
        (0..len)
            .map(|k| {
                let samples: Vec<f64> = runs.iter().map(|r| f(r).get(k).copied().unwrap_or(0.0)).collect();
                Estimate::from_samples(&samples)
            })
            .collect()
    };
    let orbit_len = runs.iter().map(|r| r.orbit_marginal.len()).max().unwrap_or(0);
    SimEstimates {
        config,
        p_idle: est(&|r| r.p_idle),
        p_busy: est(&|r| r.p_busy),
        p_failed: est(&|r| r.p_failed),
        l_r: est(&|r| r.l_r),
        l: est(&|r| r.l),
        lambda_bar: est(&|r| r.lambda_bar),
        w_r: est(&|r| r.w_r()),
        w: est(&|r| r.w()),
        b_inv: est(&|r| r.b_inv),
        d_s: est(&|r| span as f64 * r.w()),
        inventory_marginal: marginal(span, &|r| &r.inventory_marginal),
        orbit_marginal: marginal(orbit_len, &|r| &r.orbit_marginal),
        replications: runs,
    }
}

/// One replication starting empty-orbit, full stock, idle, environment 1.
pub fn run_replication(model: &Model, cfg: &SimConfig, replication: usize) -> Result<ReplicationEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replication as u64);

    let m = model.env_states();
    let policy = model.policy();
    let (lambda, mu, xi, alpha, theta) = (model.lambda(), model.mu(), model.xi(), model.alpha(), model.theta());
    let q = model.exit_rates();
    let env_targets: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|z| {
            (0..m)
                .filter(|&j| j != z && model.generator()[(z, j)] > 0.0)
                .map(|j| (j, model.generator()[(z, j)]))
                .collect()
        })
        .collect();

    let mut state = SystemState {
        orbit: 0,
        inventory: policy.capacity,
        status: ServerStatus::Idle,
        env: 1,
    };
    let mut t = 0.0;
    let mut status_time = [0.0; 3];
    let mut orbit_area = 0.0;
    let mut lambda_area = 0.0;
    let mut inventory_time = vec![0.0; policy.span()];
    let mut orbit_time: Vec<f64> = Vec::new();
    let mut events = 0u64;
    let mut max_orbit = 0u64;

    while t < cfg.horizon {
        let z = state.env - 1;
        let r = state.orbit as f64;
        let (busy, idle, failed) = match state.status {
            ServerStatus::Idle => (0.0, 1.0, 0.0),
            ServerStatus::Busy => (1.0, 0.0, 0.0),
            ServerStatus::Failed => (0.0, 0.0, 1.0),
        };
        let rates = [
            q[z],
            lambda[z],
            busy * mu[z],
            (1.0 - failed) * xi[z],
            failed * alpha[z],
            idle * r * theta[z],
        ];
        let total: f64 = rates.iter().sum();
        let hold = if total > 0.0 {
            -(1.0 - rng.gen::<f64>()).ln() / total
        } else {
            f64::INFINITY
        };
        let next = (t + hold).min(cfg.horizon);

        let dt = next - t.max(cfg.warmup);
        if dt > 0.0 {
            status_time[state.status.index()] += dt;
            orbit_area += r * dt;
            lambda_area += lambda[z] * dt;
            inventory_time[(state.inventory - policy.reorder_level - 1) as usize] += dt;
            let k = state.orbit as usize;
            if orbit_time.len() <= k {
                orbit_time.resize(k + 1, 0.0);
            }
            orbit_time[k] += dt;
        }
        t = next;
        if t >= cfg.horizon {
            break;
        }

        let mut u = rng.gen::<f64>() * total;
        let mut event = 0;
        while event + 1 < rates.len() && u >= rates[event] {
            u -= rates[event];
            event += 1;
        }
        // round-off can land the pick on a zero-rate event
        if rates[event] == 0.0 {
            event = rates.iter().rposition(|&v| v > 0.0).expect("positive total rate");
            u = 0.0;
        }
        events += 1;

        match event {
            0 => {
                let mut v = u;
                let targets = &env_targets[z];
                let mut pick = targets.len() - 1;
                for (i, &(_, rate)) in targets.iter().enumerate() {
                    if v < rate {
                        pick = i;
                        break;
                    }
                    v -= rate;
                }
                state.env = targets[pick].0 + 1;
            }
            1 => match state.status {
                ServerStatus::Idle => state.status = ServerStatus::Busy,
                _ => state.orbit += 1,
            },
            2 => {
                state.status = ServerStatus::Idle;
                state.inventory = if state.inventory == policy.reorder_level + 1 {
                    policy.capacity
                } else {
                    state.inventory - 1
                };
            }
            3 => {
                if state.status == ServerStatus::Busy {
                    state.orbit += 1;
                }
                state.status = ServerStatus::Failed;
            }
            4 => state.status = ServerStatus::Idle,
            _ => {
                state.status = ServerStatus::Busy;
                state.orbit -= 1;
            }
        }
        max_orbit = max_orbit.max(state.orbit);
        if state.orbit >= cfg.orbit_cap {
            return Err(Error::OrbitCapExceeded {
                cap: cfg.orbit_cap,
                replication,
                time: t,
            });
        }
    }

    let span = cfg.horizon - cfg.warmup;
    let l_r = orbit_area / span;
    let p_busy = status_time[1] / span;
    let inventory_marginal: Vec<f64> = inventory_time.iter().map(|v| v / span).collect();
    let b_inv = policy
        .levels()
        .zip(&inventory_marginal)
        .map(|(i, p)| i as f64 * p)
        .sum();
    Ok(ReplicationEstimate {
        replication,
        p_idle: status_time[0] / span,
        p_busy,
        p_failed: status_time[2] / span,
        l_r,
        l: l_r + p_busy,
        lambda_bar: lambda_area / span,
        b_inv,
        inventory_marginal,
        orbit_marginal: orbit_time.iter().map(|v| v / span).collect(),
        events,
        max_orbit,
    })
}
