//! Matrix-analytic analysis of a single-server (s,S) retrial inventory
//! system with server failures in a random environment.
//!
//! The state `(R, I, X, Z)` (orbit size, inventory, server status,
//! environment) is a level-dependent QBD with level `R`. The crate builds its
//! generator blocks, decides stability, computes the truncated steady state
//! with level-dependent rate matrices and derives the long-run measures. An
//! event-driven simulator estimates the same measures independently.
//!
//! ```no_run
//! use retrial_inventory::{analyze, scenario, Model, SolverOptions};
//!
//! let file = scenario::bundled("low_traffic")?;
//! let model = Model::new(file.spec())?;
//! let solution = analyze(&model, &SolverOptions::with_truncation(file.truncation()))?;
//! println!("L_R = {}", solution.report.l_r);
//! # Ok::<(), retrial_inventory::Error>(())
//! ```

pub mod error;
pub mod generator;
pub mod jump_chain;
pub mod linalg;
pub mod measures;
pub mod model;
pub mod report;
pub mod scenario;
pub mod simulator;
pub mod solver;
pub mod stability;

pub use error::{Error, Result};
pub use generator::{build_level_blocks, GeneratorBlocks, LevelBlocks};
pub use linalg::Matrix;
pub use measures::{compute_report, env_stationary, PerformanceReport};
pub use model::{
    validate_spec, EnvironmentParams, InventoryPolicy, Model, ModelSpec, Phase, PhaseIndex, ServerStatus, SystemState,
    ValidationReport, Violation,
};
pub use scenario::ScenarioFile;
pub use simulator::{simulate, Estimate, SimConfig, SimEstimates};
pub use solver::{solve_steady_state, LevelBlockSource, SolverOptions, SteadyState};
pub use stability::{analyze_stability, traffic_intensity, StabilityReport, Verdict};

/// Stability verdict, steady state and measures of one model.
#[derive(Clone, Debug)]
pub struct Solution {
    pub stability: StabilityReport,
    pub steady: SteadyState,
    pub report: PerformanceReport,
}

/// Solves a model after checking `rho < 1`.
pub fn analyze(model: &Model, options: &SolverOptions) -> Result<Solution> {
    let stability = analyze_stability(model)?;
    if stability.verdict != Verdict::Stable {
        return Err(Error::Unstable { rho: stability.rho });
    }
    let blocks = GeneratorBlocks::new(model);
    let steady = solve_steady_state(&blocks, options)?;
    let report = compute_report(&steady, model)?;
    Ok(Solution {
        stability,
        steady,
        report,
    })
}
