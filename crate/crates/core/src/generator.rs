//! Level blocks of the continuous-time generator.
//!
//! Level `R` couples to `R - 1` through `A2(R)` (successful retrials), stays
//! within the level through `A1(R)` and moves up through `A0(R)` (blocked
//! arrivals and failures of a busy server). Each block is assembled from
//! four `3m x 3m` pieces that repeat along the inventory axis.

use std::borrow::Cow;
use std::io::{self, Write};

use crate::linalg::{diag, Matrix};
use crate::model::{Model, PhaseIndex, ServerStatus};
use crate::solver::LevelBlockSource;

/// The `3m x 3m` pieces at one orbit level, plus the diagonal magnitudes.
#[derive(Clone, Debug)]
pub struct InnerBlocks {
    /// `Theta_R`: idle -> busy with `R * theta` (one retrial succeeds).
    pub retrial: Matrix,
    /// `Gamma_R`: transitions that keep orbit and inventory fixed.
    pub within: Matrix,
    /// `Lambda`: busy/failed server sends a demand to the orbit.
    pub level_up: Matrix,
    /// `M`: busy -> idle on service completion (inventory drops by one).
    pub service: Matrix,
    /// `q + lambda + xi + R theta`.
    pub idle_exit: Vec<f64>,
    /// `q + lambda + mu + xi`.
    pub busy_exit: Vec<f64>,
    /// `q + lambda + alpha`.
    pub failed_exit: Vec<f64>,
}

pub(crate) fn add_sub_block(target: &mut Matrix, row: usize, col: usize, block: &Matrix) {
    let (r, c) = block.shape();
    let mut view = target.view_mut((row, col), (r, c));
    view += block;
}

pub fn build_inner_blocks(model: &Model, level: usize) -> InnerBlocks {
    let m = model.env_states();
    let r = level as f64;
    let q = model.exit_rates();
    let (lambda, mu, xi, alpha, theta) = (model.lambda(), model.mu(), model.xi(), model.alpha(), model.theta());
    let env = model.generator();

    let idle_exit: Vec<f64> = (0..m).map(|z| q[z] + lambda[z] + xi[z] + r * theta[z]).collect();
    let busy_exit: Vec<f64> = (0..m).map(|z| q[z] + lambda[z] + mu[z] + xi[z]).collect();
    let failed_exit: Vec<f64> = (0..m).map(|z| q[z] + lambda[z] + alpha[z]).collect();

    let (idle, busy, failed) = (0, m, 2 * m);
    let width = 3 * m;

    let mut retrial = Matrix::zeros(width, width);
    let retrial_rates: Vec<f64> = theta.iter().map(|t| r * t).collect();
    add_sub_block(&mut retrial, idle, busy, &diag(&retrial_rates));

    let shifted = |extra: Vec<f64>| env - diag(&extra);
    let mut within = Matrix::zeros(width, width);
    add_sub_block(
        &mut within,
        idle,
        idle,
        &shifted((0..m).map(|z| lambda[z] + xi[z] + r * theta[z]).collect()),
    );
    add_sub_block(&mut within, idle, busy, &diag(lambda));
    add_sub_block(&mut within, idle, failed, &diag(xi));
    add_sub_block(
        &mut within,
        busy,
        busy,
        &shifted((0..m).map(|z| lambda[z] + mu[z] + xi[z]).collect()),
    );
    add_sub_block(&mut within, failed, idle, &diag(alpha));
    add_sub_block(
        &mut within,
        failed,
        failed,
        &shifted((0..m).map(|z| lambda[z] + alpha[z]).collect()),
    );

    let mut level_up = Matrix::zeros(width, width);
    add_sub_block(&mut level_up, busy, busy, &diag(lambda));
    add_sub_block(&mut level_up, busy, failed, &diag(xi));
    add_sub_block(&mut level_up, failed, failed, &diag(lambda));

    let mut service = Matrix::zeros(width, width);
    add_sub_block(&mut service, busy, idle, &diag(mu));

    InnerBlocks {
        retrial,
        within,
        level_up,
        service,
        idle_exit,
        busy_exit,
        failed_exit,
    }
}

/// Generator blocks at one level. `down` is `None` at level 0.
#[derive(Clone, Debug)]
pub struct LevelBlocks {
    pub level: usize,
    pub down: Option<Matrix>,
    pub local: Matrix,
    pub up: Matrix,
}

/// Repeats `block` along the diagonal of the `(S - s)`-fold block matrix.
pub(crate) fn block_diagonal(block: &Matrix, copies: usize) -> Matrix {
    let w = block.nrows();
    let mut out = Matrix::zeros(w * copies, w * copies);
    for i in 0..copies {
        add_sub_block(&mut out, i * w, i * w, block);
    }
    out
}

/// `Gamma` on the diagonal, `M` below it and in the top-right corner: a
/// service completion at `I = s + 1` restocks to `I = S`.
pub(crate) fn local_block(within: &Matrix, service: &Matrix, copies: usize) -> Matrix {
    let w = within.nrows();
    let mut out = block_diagonal(within, copies);
    for i in 0..copies {
        let target = if i == 0 { copies - 1 } else { i - 1 };
        add_sub_block(&mut out, i * w, target * w, service);
    }
    out
}

pub fn build_level_blocks(model: &Model, level: usize) -> LevelBlocks {
    let inner = build_inner_blocks(model, level);
    let copies = model.policy().span();
    LevelBlocks {
        level,
        down: (level >= 1).then(|| block_diagonal(&inner.retrial, copies)),
        local: local_block(&inner.within, &inner.service, copies),
        up: block_diagonal(&inner.level_up, copies),
    }
}

/// Level-block provider for one model.
///
/// `A0` is level-invariant and `A1(R)`, `A2(R)` differ from their level-0/1
/// counterparts only by `R * theta` on idle phases, so those three pieces are
/// built once and per-level blocks are derived on request.
#[derive(Clone, Debug)]
pub struct GeneratorBlocks<'a> {
    model: &'a Model,
    up: Matrix,
    local_base: Matrix,
    down_unit: Matrix,
    idle_theta: Vec<(usize, f64)>,
}

impl<'a> GeneratorBlocks<'a> {
    pub fn new(model: &'a Model) -> Self {
        let base = build_level_blocks(model, 0);
        let unit = build_level_blocks(model, 1);
        let phases = model.phases();
        let idle_theta = (0..model.policy().span())
            .flat_map(|i| (0..model.env_states()).map(move |z| (i, z)))
            .map(|(i, z)| (phases.offset(i, ServerStatus::Idle, z), model.theta()[z]))
            .collect();
        Self {
            model,
            up: base.up,
            local_base: base.local,
            down_unit: unit.down.expect("level 1 has a down block"),
            idle_theta,
        }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    pub fn level(&self, level: usize) -> LevelBlocks {
        LevelBlocks {
            level,
            down: (level >= 1).then(|| self.down(level).into_owned()),
            local: self.local(level).into_owned(),
            up: self.up.clone(),
        }
    }
}

impl LevelBlockSource for GeneratorBlocks<'_> {
    fn phases(&self) -> usize {
        self.up.nrows()
    }

    fn up(&self, _level: usize) -> Cow<'_, Matrix> {
        Cow::Borrowed(&self.up)
    }

    fn local(&self, level: usize) -> Cow<'_, Matrix> {
        if level == 0 {
            return Cow::Borrowed(&self.local_base);
        }
        let mut local = self.local_base.clone();
        let r = level as f64;
        for &(k, theta) in &self.idle_theta {
            local[(k, k)] -= r * theta;
        }
        Cow::Owned(local)
    }

    fn down(&self, level: usize) -> Cow<'_, Matrix> {
        assert!(level >= 1, "no down block at level 0");
        if level == 1 {
            Cow::Borrowed(&self.down_unit)
        } else {
            Cow::Owned(&self.down_unit * level as f64)
        }
    }
}

/// Writes a block as CSV with phase labels on both axes.
pub fn write_block_csv<W: Write>(out: &mut W, block: &Matrix, phases: &PhaseIndex) -> io::Result<()> {
    write!(out, "phase")?;
    for j in 0..block.ncols() {
        write!(out, ",{}", phases.label(j))?;
    }
    writeln!(out)?;
    for i in 0..block.nrows() {
        write!(out, "{}", phases.label(i))?;
        for j in 0..block.ncols() {
            write!(out, ",{}", block[(i, j)])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::row_sums;
    use crate::scenario;
    use approx::assert_abs_diff_eq;

    fn model(name: &str) -> Model {
        Model::new(scenario::bundled(name).unwrap().spec()).unwrap()
    }

    #[test]
    fn retrial_entry_scales_with_level() {
        let m = model("low_traffic");
        let inner = build_inner_blocks(&m, 1);
        // idle z=5 -> busy z=5
        assert_eq!(inner.retrial[(4, 7 + 4)], 5.0);
        let zero = build_inner_blocks(&m, 0);
        assert!(zero.retrial.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn idle_exit_rate_example() {
        let m = model("high_traffic");
        let inner = build_inner_blocks(&m, 2);
        assert_abs_diff_eq!(inner.idle_exit[6], 35.0, epsilon = 1e-12);
    }

    #[test]
    fn inner_blocks_sign_pattern() {
        let m = model("low_traffic");
        let inner = build_inner_blocks(&m, 4);
        for i in 0..21 {
            for j in 0..21 {
                if i != j {
                    assert!(inner.within[(i, j)] >= 0.0);
                }
                assert!(inner.retrial[(i, j)] >= 0.0);
                assert!(inner.level_up[(i, j)] >= 0.0);
                assert!(inner.service[(i, j)] >= 0.0);
            }
        }
        let diag_mag: Vec<f64> = inner
            .idle_exit
            .iter()
            .chain(&inner.busy_exit)
            .chain(&inner.failed_exit)
            .copied()
            .collect();
        for (k, d) in diag_mag.iter().enumerate() {
            assert_abs_diff_eq!(-inner.within[(k, k)], *d, epsilon = 1e-12);
        }
    }

    #[test]
    fn table_entries() {
        let m = model("low_traffic");
        let idx = m.phases();
        let b = build_level_blocks(&m, 0);
        let from = idx.index(11, ServerStatus::Busy, 4).unwrap();
        let to = idx.index(35, ServerStatus::Idle, 4).unwrap();
        assert_eq!(b.local[(from, to)], 12.0);
        let from = idx.index(20, ServerStatus::Busy, 2).unwrap();
        let to = idx.index(20, ServerStatus::Failed, 2).unwrap();
        assert_eq!(b.up[(from, to)], 3.80);
        assert!(b.down.is_none());
    }

    #[test]
    fn conservative_rows() {
        let m = model("low_traffic");
        let provider = GeneratorBlocks::new(&m);
        for level in [0usize, 1, 2, 3, 10, 75] {
            let built = build_level_blocks(&m, level);
            let mut total = built.local.clone() + &built.up;
            if let Some(d) = &built.down {
                total += d;
            }
            assert!(row_sums(&total).iter().all(|s| s.abs() < 1e-10), "level {level}");
            // provider derives identical blocks
            assert_abs_diff_eq!(provider.local(level).as_ref(), &built.local, epsilon = 1e-12);
            if let Some(d) = &built.down {
                assert_abs_diff_eq!(provider.down(level).as_ref(), d, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn csv_dump_has_labels() {
        let m = model("low_traffic");
        let inner = build_level_blocks(&m, 1);
        let mut buf = Vec::new();
        write_block_csv(&mut buf, &inner.up, m.phases()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("phase,I11-idle-z1,I11-idle-z2"));
        assert_eq!(text.lines().count(), 526);
    }
}
