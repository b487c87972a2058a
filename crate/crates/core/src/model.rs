//! Model parameterization, state space and the phase enumeration.
//!
//! A phase is the triple (inventory, server status, environment). Phases are
//! enumerated inventory-major, then status in the order idle, busy, failed,
//! then environment:
//!
//! ```text
//! index(I, X, Z) = ((I - (s + 1)) * 3 + x) * m + (Z - 1)
//! ```
//!
//! Every block matrix in the crate uses this ordering.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for generator row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServerStatus {
    Idle,
    Busy,
    Failed,
}

impl ServerStatus {
    pub const ALL: [ServerStatus; 3] = [ServerStatus::Idle, ServerStatus::Busy, ServerStatus::Failed];

    pub fn index(self) -> usize {
        match self {
            ServerStatus::Idle => 0,
            ServerStatus::Busy => 1,
            ServerStatus::Failed => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            ServerStatus::Idle => "idle",
            ServerStatus::Busy => "busy",
            ServerStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for ServerStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Rates of every exponential clock, one entry per environment state, plus
/// the environment generator `Q` (row-major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    pub states: usize,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub xi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
    pub generator: Vec<Vec<f64>>,
}

impl EnvironmentParams {
    /// Total exit rates `q_z = sum_{z' != z} q_{zz'}`.
    pub fn exit_rates(&self) -> Vec<f64> {
        self.generator
            .iter()
            .enumerate()
            .map(|(z, row)| row.iter().enumerate().filter(|&(w, _)| w != z).map(|(_, &v)| v).sum())
            .collect()
    }
}

/// `(s, S)` replenishment policy. Reachable inventory levels are `s+1..=S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventoryPolicy {
    pub reorder_level: u32,
    pub capacity: u32,
}

impl InventoryPolicy {
    pub fn new(reorder_level: u32, capacity: u32) -> Self {
        Self {
            reorder_level,
            capacity,
        }
    }

    /// Number of reachable inventory levels, `S - s`.
    pub fn span(&self) -> usize {
        self.capacity.saturating_sub(self.reorder_level) as usize
    }

    pub fn levels(&self) -> impl Iterator<Item = u32> {
        self.reorder_level + 1..=self.capacity
    }

    /// Mean of the uniform distribution on `s+1..=S`.
    pub fn mean_level(&self) -> f64 {
        (self.capacity as f64 + self.reorder_level as f64 + 1.0) / 2.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub env: EnvironmentParams,
    pub policy: InventoryPolicy,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoEnvironmentStates,
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    GeneratorShape {
        expected: usize,
        row: Option<usize>,
        found: usize,
    },
    NonFinite {
        field: &'static str,
        env: usize,
    },
    NonPositiveRate {
        field: &'static str,
        env: usize,
        value: f64,
    },
    NegativeRate {
        field: &'static str,
        env: usize,
        value: f64,
    },
    NegativeOffDiagonal {
        row: usize,
        col: usize,
        value: f64,
    },
    RowSumNonzero {
        row: usize,
        sum: f64,
    },
    PolicyOrder {
        reorder_level: u32,
        capacity: u32,
    },
    ReducibleGenerator,
    AllRetrialRatesZero,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoEnvironmentStates => write!(f, "m must be at least 1"),
            Violation::LengthMismatch { field, expected, found } => {
                write!(f, "{field} length mismatch: expected {expected}, found {found}")
            }
            Violation::GeneratorShape {
                expected,
                row: None,
                found,
            } => write!(f, "Q shape mismatch: expected {expected} rows, found {found}"),
            Violation::GeneratorShape {
                expected,
                row: Some(r),
                found,
            } => write!(
                f,
                "Q shape mismatch: row {} has {found} entries, expected {expected}",
                r + 1
            ),
            Violation::NonFinite { field, env } => {
                write!(f, "{field}[{}] is not finite", env + 1)
            }
            Violation::NonPositiveRate { field, env, value } => {
                write!(f, "{field}[{}] = {value} must be positive", env + 1)
            }
            Violation::NegativeRate { field, env, value } => {
                write!(f, "{field}[{}] = {value} must be non-negative", env + 1)
            }
            Violation::NegativeOffDiagonal { row, col, value } => write!(
                f,
                "Q[{}][{}] = {value}: off-diagonal entries must be non-negative",
                row + 1,
                col + 1
            ),
            Violation::RowSumNonzero { row, sum } => {
                write!(f, "generator row sum nonzero: row {} sums to {sum:e}", row + 1)
            }
            Violation::PolicyOrder {
                reorder_level,
                capacity,
            } => write!(
                f,
                "s must be strictly less than S (s = {reorder_level}, S = {capacity})"
            ),
            Violation::ReducibleGenerator => write!(f, "environment generator Q is reducible"),
            Violation::AllRetrialRatesZero => write!(f, "all retrial rates are zero: the orbit can never empty"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Checks a specification. Violations are collected, never raised.
pub fn validate_spec(spec: &ModelSpec) -> ValidationReport {
    let mut violations = Vec::new();
    let env = &spec.env;
    let m = env.states;

    if m == 0 {
        violations.push(Violation::NoEnvironmentStates);
    }

    let rate_fields: [(&'static str, &Vec<f64>, bool); 5] = [
        ("lambda", &env.lambda, true),
        ("mu", &env.mu, true),
        ("xi", &env.xi, false),
        ("alpha", &env.alpha, true),
        ("theta", &env.theta, false),
    ];
    let mut lengths_ok = true;
    for (field, values, strictly_positive) in rate_fields {
        if values.len() != m {
            lengths_ok = false;
            violations.push(Violation::LengthMismatch {
                field,
                expected: m,
                found: values.len(),
            });
            continue;
        }
        for (z, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                violations.push(Violation::NonFinite { field, env: z });
            } else if strictly_positive && v <= 0.0 {
                violations.push(Violation::NonPositiveRate {
                    field,
                    env: z,
                    value: v,
                });
            } else if v < 0.0 {
                violations.push(Violation::NegativeRate {
                    field,
                    env: z,
                    value: v,
                });
            }
        }
    }
    if lengths_ok && m > 0 && env.theta.iter().all(|&t| t == 0.0) {
        violations.push(Violation::AllRetrialRatesZero);
    }

    let mut shape_ok = env.generator.len() == m;
    if !shape_ok {
        violations.push(Violation::GeneratorShape {
            expected: m,
            row: None,
            found: env.generator.len(),
        });
    }
    for (r, row) in env.generator.iter().enumerate() {
        if row.len() != m {
            shape_ok = false;
            violations.push(Violation::GeneratorShape {
                expected: m,
                row: Some(r),
                found: row.len(),
            });
        }
    }
    if shape_ok {
        for (r, row) in env.generator.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    violations.push(Violation::NonFinite { field: "Q", env: r });
                } else if r != c && v < 0.0 {
                    violations.push(Violation::NegativeOffDiagonal {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if sum.is_nan() || sum.abs() > ROW_SUM_TOLERANCE {
                violations.push(Violation::RowSumNonzero { row: r, sum });
            }
        }
        if m > 0 && !is_irreducible(&env.generator) {
            violations.push(Violation::ReducibleGenerator);
        }
    }

    if spec.policy.reorder_level >= spec.policy.capacity {
        violations.push(Violation::PolicyOrder {
            reorder_level: spec.policy.reorder_level,
            capacity: spec.policy.capacity,
        });
    }

    ValidationReport { violations }
}

/// Strong connectivity of the positive off-diagonal pattern.
pub fn is_irreducible(generator: &[Vec<f64>]) -> bool {
    let n = generator.len();
    if n == 0 {
        return false;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let rate = if forward { generator[u][v] } else { generator[v][u] };
                if v != u && rate > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// A validated, immutable model.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    generator: DMatrix<f64>,
    exit_rates: Vec<f64>,
    phases: PhaseIndex,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let report = validate_spec(&spec);
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        let m = spec.env.states;
        let generator = DMatrix::from_fn(m, m, |r, c| spec.env.generator[r][c]);
        let exit_rates = spec.env.exit_rates();
        let phases = PhaseIndex::new(spec.policy, m);
        Ok(Self {
            spec,
            generator,
            exit_rates,
            phases,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn env_states(&self) -> usize {
        self.spec.env.states
    }

    pub fn policy(&self) -> InventoryPolicy {
        self.spec.policy
    }

    pub fn phases(&self) -> &PhaseIndex {
        &self.phases
    }

    pub fn lambda(&self) -> &[f64] {
        &self.spec.env.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.spec.env.mu
    }

    pub fn xi(&self) -> &[f64] {
        &self.spec.env.xi
    }

    pub fn alpha(&self) -> &[f64] {
        &self.spec.env.alpha
    }

    pub fn theta(&self) -> &[f64] {
        &self.spec.env.theta
    }

    /// Environment generator `Q`.
    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    /// `q_z = -q_zz`.
    pub fn exit_rates(&self) -> &[f64] {
        &self.exit_rates
    }
}

/// A phase `(I, X, Z)`; `env` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase {
    pub inventory: u32,
    pub status: ServerStatus,
    pub env: usize,
}

/// Full system state `(R, I, X, Z)`; `env` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SystemState {
    pub orbit: u64,
    pub inventory: u32,
    pub status: ServerStatus,
    pub env: usize,
}

impl SystemState {
    pub fn phase(&self) -> Phase {
        Phase {
            inventory: self.inventory,
            status: self.status,
            env: self.env,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseIndex {
    policy: InventoryPolicy,
    states: usize,
}

impl PhaseIndex {
    pub fn new(policy: InventoryPolicy, states: usize) -> Self {
        Self { policy, states }
    }

    /// Phases per level, `(S - s) * 3 * m`.
    pub fn len(&self) -> usize {
        self.policy.span() * 3 * self.states
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Width of one inventory block, `3m`.
    pub fn block_width(&self) -> usize {
        3 * self.states
    }

    pub fn index(&self, inventory: u32, status: ServerStatus, env: usize) -> Result<usize> {
        let p = self.policy;
        if inventory <= p.reorder_level || inventory > p.capacity {
            return Err(Error::PhaseOutOfRange(format!(
                "inventory {inventory} outside [{}, {}]",
                p.reorder_level + 1,
                p.capacity
            )));
        }
        if env == 0 || env > self.states {
            return Err(Error::PhaseOutOfRange(format!(
                "environment {env} outside [1, {}]",
                self.states
            )));
        }
        let offset = (inventory - p.reorder_level - 1) as usize;
        Ok(self.offset(offset, status, env - 1))
    }

    pub fn unindex(&self, index: usize) -> Result<Phase> {
        if index >= self.len() {
            return Err(Error::PhaseOutOfRange(format!(
                "index {index} outside [0, {})",
                self.len()
            )));
        }
        let env = index % self.states;
        let rest = index / self.states;
        let status = ServerStatus::from_index(rest % 3).expect("status index in 0..3");
        let offset = rest / 3;
        Ok(Phase {
            inventory: self.policy.reorder_level + 1 + offset as u32,
            status,
            env: env + 1,
        })
    }

    /// Index from zero-based inventory offset and zero-based environment.
    #[inline]
    pub fn offset(&self, inventory_offset: usize, status: ServerStatus, env0: usize) -> usize {
        (inventory_offset * 3 + status.index()) * self.states + env0
    }

    /// Label of the form `I{I}-{status}-z{Z}`.
    pub fn label(&self, index: usize) -> String {
        match self.unindex(index) {
            Ok(p) => format!("I{}-{}-z{}", p.inventory, p.status, p.env),
            Err(_) => format!("#{index}"),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Phase> + '_ {
        (0..self.len()).map(move |k| self.unindex(k).expect("index in range"))
    }
}
