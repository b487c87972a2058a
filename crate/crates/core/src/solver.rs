//! Truncated steady state of a level-dependent QBD.
//!
//! With `p_R` the stationary row vector of level `R`,
//!
//! ```text
//! p_{R+1} = p_R R_R
//! A0(l) + R_l A1(l+1) + R_l R_{l+1} A2(l+2) = 0
//! p_0 (A1(0) + R_0 A2(1)) = 0
//! ```
//!
//! The rate matrices are computed backwards from the truncation level `R*`.
//! At `R*` the up-transitions are removed and their rates returned to the
//! diagonal, so the truncated chain stays conservative; this makes
//! `R_{R*-1} = -A0(R*-1) (A1(R*) + diag(A0(R*) 1))^{-1}` and the boundary
//! matrix singular with a one-dimensional left null space.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::linalg::{
    left_null_vector, max_abs, row_sums, sparse_left_mul, sparse_right_mul, spectral_radius, vec_mul, Matrix,
};

/// Default truncation level.
pub const DEFAULT_TRUNCATION: usize = 75;

/// Source of the level blocks `A0(l)`, `A1(l)`, `A2(l)`.
pub trait LevelBlockSource {
    fn phases(&self) -> usize;
    /// `A0(level)`: level -> level + 1.
    fn up(&self, level: usize) -> Cow<'_, Matrix>;
    /// `A1(level)`.
    fn local(&self, level: usize) -> Cow<'_, Matrix>;
    /// `A2(level)`: level -> level - 1, for `level >= 1`.
    fn down(&self, level: usize) -> Cow<'_, Matrix>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    pub truncation: usize,
    /// Keep `R_0 .. R_{R*-1}` in the result. Each is `phases x phases`.
    pub retain_rate_matrices: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
            retain_rate_matrices: true,
        }
    }
}

impl SolverOptions {
    pub fn with_truncation(truncation: usize) -> Self {
        Self {
            truncation,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    /// `R_0 .. R_{R*-1}`; empty unless retained.
    pub rate_matrices: Vec<Matrix>,
    /// `p_0 .. p_{R*}`, normalized to total mass one.
    pub levels: Vec<Vec<f64>>,
    pub truncation: usize,
    /// Per-level decay used for the tail estimate.
    pub tail_decay: f64,
    /// Geometric extrapolation of the mass beyond `R*`; `None` when the
    /// estimated decay is not below one.
    pub tail_mass_bound: Option<f64>,
}

impl SteadyState {
    /// `p_R 1` for `R = 0..=R*`.
    pub fn level_masses(&self) -> Vec<f64> {
        self.levels.iter().map(|p| p.iter().sum()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.level_masses().iter().sum()
    }
}

/// The top level with up-transitions folded back onto the diagonal.
fn closed_top(src: &impl LevelBlockSource, truncation: usize) -> Matrix {
    let mut top = src.local(truncation).into_owned();
    for (k, s) in row_sums(&src.up(truncation)).into_iter().enumerate() {
        top[(k, k)] += s;
    }
    top
}

fn check_diagonal(x: &Matrix, level: usize) -> Result<()> {
    for k in 0..x.nrows() {
        let d = x[(k, k)];
        if d.is_nan() || d >= 0.0 {
            return Err(Error::SolverDegenerate {
                level,
                reason: format!("diagonal entry {k} is {d}, expected negative"),
            });
        }
        let off: f64 = (0..x.ncols()).filter(|&j| j != k).map(|j| x[(k, j)]).sum();
        if off > -d * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::SolverDegenerate {
                level,
                reason: format!("row {k} is not diagonally dominant"),
            });
        }
    }
    Ok(())
}

/// Backward recursion for `R_0 .. R_{R*-1}`.
pub fn compute_rate_matrices(src: &impl LevelBlockSource, truncation: usize) -> Result<Vec<Matrix>> {
    if truncation == 0 {
        return Err(Error::InvalidArgument("truncation level must be at least 1".into()));
    }
    let mut rates: Vec<Matrix> = Vec::with_capacity(truncation);
    for level in (0..truncation).rev() {
        let x = if level + 1 == truncation {
            closed_top(src, truncation)
        } else {
            let next = rates.last().expect("rate matrix of the level above");
            src.local(level + 1).into_owned() + sparse_right_mul(next, &src.down(level + 2))
        };
        check_diagonal(&x, level)?;
        let inv = x.lu().try_inverse().ok_or_else(|| Error::SolverDegenerate {
            level,
            reason: "singular inner matrix".into(),
        })?;
        let mut r = -sparse_left_mul(&src.up(level), &inv);
        let scale = r.amax().max(1.0);
        let min = r.min();
        if min < -1e-10 * scale {
            return Err(Error::SolverDegenerate {
                level,
                reason: format!("rate matrix entry {min:e} is negative"),
            });
        }
        r.apply(|v| {
            if *v < 0.0 {
                *v = 0.0
            }
        });
        rates.push(r);
    }
    rates.reverse();
    Ok(rates)
}

/// Left null vector of `A1(0) + R_0 A2(1)`, summing to one.
pub fn solve_boundary(src: &impl LevelBlockSource, r0: &Matrix) -> Result<Vec<f64>> {
    let b = src.local(0).into_owned() + sparse_right_mul(r0, &src.down(1));
    let mut p0 = left_null_vector(&b, 1e-9).map_err(|e| Error::BoundaryDegenerate(e.to_string()))?;
    let min = p0.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(Error::BoundaryDegenerate(format!(
            "null vector has negative entry {min:e}"
        )));
    }
    for v in p0.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(p0)
}

pub fn assemble_steady_state(p0: Vec<f64>, rates: Vec<Matrix>, retain_rate_matrices: bool) -> SteadyState {
    let truncation = rates.len();
    let mut levels = Vec::with_capacity(truncation + 1);
    levels.push(p0);
    for r in &rates {
        let next = vec_mul(levels.last().expect("previous level"), r);
        levels.push(next);
    }
    let total: f64 = levels.iter().flatten().sum();
    for p in levels.iter_mut() {
        for v in p.iter_mut() {
            *v /= total;
        }
    }

    // decay measured away from the closure at R*
    let probe = truncation.saturating_sub(1 + (truncation / 10).max(1));
    let tail_decay = rates.get(probe).map(|r| spectral_radius(r, 500)).unwrap_or(0.0);
    let top_mass: f64 = levels.last().map(|p| p.iter().sum()).unwrap_or(0.0);
    let tail_mass_bound = (tail_decay < 1.0).then(|| top_mass * tail_decay / (1.0 - tail_decay));

    SteadyState {
        rate_matrices: if retain_rate_matrices { rates } else { Vec::new() },
        levels,
        truncation,
        tail_decay,
        tail_mass_bound,
    }
}

pub fn solve_steady_state(src: &impl LevelBlockSource, options: &SolverOptions) -> Result<SteadyState> {
    let rates = compute_rate_matrices(src, options.truncation)?;
    let p0 = solve_boundary(src, &rates[0])?;
    Ok(assemble_steady_state(p0, rates, options.retain_rate_matrices))
}

/// Largest balance-equation residual over levels `0..R*` of the truncated
/// chain (the closed top level included).
pub fn balance_residual(src: &impl LevelBlockSource, steady: &SteadyState) -> f64 {
    let top = steady.truncation;
    let mut worst: f64 = 0.0;
    for level in 0..=top {
        let local = if level == top {
            Cow::Owned(closed_top(src, top))
        } else {
            src.local(level)
        };
        let mut flow = vec_mul(&steady.levels[level], &local);
        if level >= 1 {
            let inflow = vec_mul(&steady.levels[level - 1], &src.up(level - 1));
            flow.iter_mut().zip(inflow).for_each(|(f, v)| *f += v);
        }
        if level < top {
            let inflow = vec_mul(&steady.levels[level + 1], &src.down(level + 1));
            flow.iter_mut().zip(inflow).for_each(|(f, v)| *f += v);
        }
        worst = worst.max(max_abs(&flow));
    }
    worst
}
