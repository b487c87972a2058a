//! Embedded jump chain and its limit as the orbit grows.
//!
//! Each generator row is divided by its exit rate. As `R -> inf` the idle
//! exit rate `q + lambda + xi + R theta` is dominated by retrials, so an idle
//! server is immediately taken by an orbiting demand; the busy and failed
//! rows do not depend on `R`.

use crate::error::{Error, Result};
use crate::generator::{add_sub_block, block_diagonal, local_block, LevelBlocks};
use crate::linalg::{diag, row_sums, Matrix};
use crate::model::Model;

/// Tolerance for the stochasticity check on the limiting matrix.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-10;

/// Transition probabilities of the jump chain at one level.
#[derive(Clone, Debug)]
pub struct JumpBlocks {
    pub level: usize,
    pub down: Option<Matrix>,
    pub local: Matrix,
    pub up: Matrix,
}

impl JumpBlocks {
    pub fn total(&self) -> Matrix {
        let mut total = &self.local + &self.up;
        if let Some(d) = &self.down {
            total += d;
        }
        total
    }
}

pub fn embed_jump_blocks(blocks: &LevelBlocks) -> Result<JumpBlocks> {
    let n = blocks.local.nrows();
    let exit: Vec<f64> = (0..n).map(|k| -blocks.local[(k, k)]).collect();
    if let Some(phase) = exit.iter().position(|&d| d.is_nan() || d <= 0.0) {
        return Err(Error::DegenerateState { phase });
    }
    let scale = |m: &Matrix| {
        let mut out = m.clone();
        for (k, d) in exit.iter().enumerate() {
            out.row_mut(k).unscale_mut(*d);
        }
        out
    };
    let mut local = scale(&blocks.local);
    local.fill_diagonal(0.0);
    Ok(JumpBlocks {
        level: blocks.level,
        down: blocks.down.as_ref().map(scale),
        local,
        up: scale(&blocks.up),
    })
}

/// Element-wise limits of the jump blocks as `R -> inf`.
#[derive(Clone, Debug)]
pub struct JumpChainLimits {
    /// Limit of the normalized service block (`3m x 3m`).
    pub service: Matrix,
    /// Limit of the normalized `Lambda + Gamma_R + Theta_R` (`3m x 3m`).
    pub within_and_up: Matrix,
    /// Limit of the normalized `Lambda` (`3m x 3m`).
    pub level_up_inner: Matrix,
    /// Full limiting transition matrix.
    pub total: Matrix,
    /// Limit of the up-block.
    pub up: Matrix,
    /// Limit of the down-block: idle -> busy with probability one.
    pub down: Matrix,
    /// `total - up - down`.
    pub local: Matrix,
}

pub fn compute_limits(model: &Model) -> Result<JumpChainLimits> {
    if let Some(z) = model.theta().iter().position(|&t| t <= 0.0) {
        return Err(Error::ZeroRetrialRate { env: z + 1 });
    }
    let m = model.env_states();
    let q = model.exit_rates();
    let (lambda, mu, xi, alpha) = (model.lambda(), model.mu(), model.xi(), model.alpha());
    let busy_exit: Vec<f64> = (0..m).map(|z| q[z] + lambda[z] + mu[z] + xi[z]).collect();
    let failed_exit: Vec<f64> = (0..m).map(|z| q[z] + lambda[z] + alpha[z]).collect();
    let ratio = |num: &[f64], den: &[f64]| -> Vec<f64> { num.iter().zip(den).map(|(a, b)| a / b).collect() };
    // (diag(lambda + q) + Q) with rows divided by `exit`
    let env_stay = |exit: &[f64]| {
        let mut out = model.generator().clone();
        for z in 0..m {
            out[(z, z)] += q[z] + lambda[z];
            out.row_mut(z).unscale_mut(exit[z]);
        }
        out
    };

    let (idle, busy, failed) = (0, m, 2 * m);
    let width = 3 * m;

    let mut service = Matrix::zeros(width, width);
    add_sub_block(&mut service, busy, idle, &diag(&ratio(mu, &busy_exit)));

    let mut level_up_inner = Matrix::zeros(width, width);
    add_sub_block(&mut level_up_inner, busy, busy, &diag(&ratio(lambda, &busy_exit)));
    add_sub_block(&mut level_up_inner, busy, failed, &diag(&ratio(xi, &busy_exit)));
    add_sub_block(&mut level_up_inner, failed, failed, &diag(&ratio(lambda, &failed_exit)));

    let identity = Matrix::identity(m, m);
    let mut within_and_up = Matrix::zeros(width, width);
    add_sub_block(&mut within_and_up, idle, busy, &identity);
    add_sub_block(&mut within_and_up, busy, busy, &env_stay(&busy_exit));
    add_sub_block(&mut within_and_up, busy, failed, &diag(&ratio(xi, &busy_exit)));
    add_sub_block(&mut within_and_up, failed, idle, &diag(&ratio(alpha, &failed_exit)));
    add_sub_block(&mut within_and_up, failed, failed, &env_stay(&failed_exit));

    let mut retrial_inner = Matrix::zeros(width, width);
    add_sub_block(&mut retrial_inner, idle, busy, &identity);

    let copies = model.policy().span();
    let total = local_block(&within_and_up, &service, copies);
    let up = block_diagonal(&level_up_inner, copies);
    let down = block_diagonal(&retrial_inner, copies);
    let local = &total - &up - &down;

    let err = row_sums(&total).iter().fold(0.0_f64, |a, s| a.max((s - 1.0).abs()));
    if err > STOCHASTIC_TOLERANCE {
        return Err(Error::NotStochastic(err));
    }

    Ok(JumpChainLimits {
        service,
        within_and_up,
        level_up_inner,
        total,
        up,
        down,
        local,
    })
}
