use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use retrial_inventory::report::{compare, render_comparison, render_report_table, render_sim_table, render_stability};
use retrial_inventory::{
    analyze, analyze_stability, build_level_blocks, simulate, validate_spec, Error, Model, PerformanceReport,
    ScenarioFile, SimConfig, SimEstimates, SolverOptions, StabilityReport, Verdict,
};
use serde_json::json;

use crate::output;
use crate::{Command, Format, SimArgs, SolveArgs};

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Unstable { .. } => 2,
                Error::OrbitCapExceeded { .. } => 3,
                _ => 1,
            };
        }
    }
    1
}

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { scenario } => validate(&scenario),
        Command::Stability { scenario, format } => stability(&scenario, format),
        Command::Solve {
            scenario,
            solve,
            dump_blocks,
            format,
            out,
        } => solve_cmd(&scenario, &solve, dump_blocks, format, out.as_deref()),
        Command::Simulate {
            scenario,
            sim,
            format,
            out,
        } => simulate_cmd(&scenario, &sim, format, out.as_deref()),
        Command::Report {
            scenario,
            compare,
            from,
            solve,
            sim,
            format,
            out,
        } => report_cmd(
            &scenario,
            compare,
            from.as_deref(),
            &solve,
            &sim,
            format,
            out.as_deref(),
        ),
    }
}

fn load(path: &Path) -> Result<(ScenarioFile, Model)> {
    let file = ScenarioFile::load(path)?;
    let model = Model::new(file.spec())?;
    Ok((file, model))
}

fn sim_config(file: &ScenarioFile, args: &SimArgs) -> SimConfig {
    let mut cfg = file.sim_config();
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.replications {
        cfg.replications = v;
    }
    if let Some(v) = args.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = args.warmup {
        cfg.warmup = v;
    }
    if let Some(v) = args.orbit_cap {
        cfg.orbit_cap = v;
    }
    cfg
}

fn solver_options(file: &ScenarioFile, args: &SolveArgs) -> SolverOptions {
    SolverOptions {
        truncation: args.truncation.unwrap_or_else(|| file.truncation()),
        retain_rate_matrices: false,
    }
}

fn warn_disagreement(report: &StabilityReport) {
    if report.drift_sign_disagreement {
        eprintln!(
            "warning: the jump-chain drift D* = {:.6e} and the closed-form drift D = {:.6e} have different signs; \
             the verdict follows rho",
            report.numerical_drift.unwrap_or(f64::NAN),
            report.closed_form_drift
        );
    }
}

fn validate(path: &Path) -> Result<ExitCode> {
    let file = ScenarioFile::load(path)?;
    let report = validate_spec(&file.spec());
    if !report.is_valid() {
        println!("{report}");
        return Ok(ExitCode::from(1));
    }
    if file.truncation() == 0 {
        println!("truncation must be at least 1");
        return Ok(ExitCode::from(1));
    }
    if let Err(e) = file.sim_config().validate() {
        println!("sim block: {e}");
        return Ok(ExitCode::from(1));
    }
    println!(
        "valid: m = {}, s = {}, S = {}, {} phases per level",
        file.m,
        file.s,
        file.capacity,
        3 * file.m * (file.capacity - file.s) as usize
    );
    Ok(ExitCode::SUCCESS)
}

fn stability(path: &Path, format: Format) -> Result<ExitCode> {
    let (_, model) = load(path)?;
    let report = analyze_stability(&model)?;
    match format {
        Format::Table => print!("{}", render_stability(&report)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    warn_disagreement(&report);
    Ok(match report.verdict {
        Verdict::Stable => ExitCode::SUCCESS,
        Verdict::Unstable | Verdict::Boundary => ExitCode::from(2),
    })
}

fn solve_cmd(
    path: &Path,
    args: &SolveArgs,
    dump_blocks: Option<usize>,
    format: Format,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let (file, model) = load(path)?;
    if dump_blocks.is_some() && out.is_none() {
        anyhow::bail!("--dump-blocks needs --out");
    }
    let solution = analyze(&model, &solver_options(&file, args))?;
    warn_disagreement(&solution.stability);
    let table = render_report_table(&solution.report);
    match format {
        Format::Table => print!("{table}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&solution.report)?),
    }
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        output::write_json(dir, output::REPORT_JSON, &solution.report)?;
        output::write_json(dir, "stability.json", &solution.stability)?;
        output::write_text(dir, "report.txt", &table)?;
        output::write_solution(dir, &model, &solution.steady, &solution.report)?;
        if let Some(level) = dump_blocks {
            output::write_blocks(dir, &model, &build_level_blocks(&model, level))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_cmd(path: &Path, args: &SimArgs, format: Format, out: Option<&Path>) -> Result<ExitCode> {
    let (file, model) = load(path)?;
    let est = simulate(&model, &sim_config(&file, args))?;
    let table = render_sim_table(&est);
    match format {
        Format::Table => print!("{table}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&est)?),
    }
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        output::write_json(dir, output::SIMULATION_JSON, &est)?;
        output::write_text(dir, "simulation.txt", &table)?;
        output::write_simulation(dir, &est)?;
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn report_cmd(
    path: &Path,
    merged: bool,
    from: Option<&Path>,
    solve: &SolveArgs,
    sim: &SimArgs,
    format: Format,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let (analytic, simulated): (PerformanceReport, SimEstimates) = match from {
        Some(dir) => (
            output::read_json(dir, output::REPORT_JSON)?,
            output::read_json(dir, output::SIMULATION_JSON)?,
        ),
        None => {
            let (file, model) = load(path)?;
            let solution = analyze(&model, &solver_options(&file, solve))?;
            warn_disagreement(&solution.stability);
            let est = simulate(&model, &sim_config(&file, sim)).context("simulation failed")?;
            (solution.report, est)
        }
    };

    let rows = compare(&analytic, &simulated);
    let text = if merged {
        render_comparison(&rows)
    } else {
        format!(
            "analytic\n{}\nsimulated\n{}",
            render_report_table(&analytic),
            render_sim_table(&simulated)
        )
    };
    let doc = json!({
        "analytic": analytic,
        "simulated": simulated,
        "comparison": rows.iter().map(|r| json!({
            "measure": r.measure,
            "analytic": r.analytic,
            "simulated": r.simulated.mean,
            "ci_halfwidth": r.simulated.half_width,
            "rel_diff": r.rel_diff,
            "covered": r.covered,
        })).collect::<Vec<_>>(),
    });
    match format {
        Format::Table => print!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&doc)?),
    }
    if let Some(dir) = out {
        output::ensure_dir(dir)?;
        output::write_text(dir, "comparison.txt", &text)?;
        output::write_json(dir, "comparison.json", &doc)?;
    }
    Ok(ExitCode::SUCCESS)
}
