//! Files written by `solve`, `simulate` and `report`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use retrial_inventory::generator::write_block_csv;
use retrial_inventory::report::distribution_rows;
use retrial_inventory::{LevelBlocks, Model, PerformanceReport, SimEstimates, SteadyState};
use serde::Serialize;

pub const REPORT_JSON: &str = "report.json";
pub const SIMULATION_JSON: &str = "simulation.json";

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_text(dir, name, &(text + "\n"))
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<File>> {
    let path = dir.join(name);
    csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_solution(dir: &Path, model: &Model, steady: &SteadyState, report: &PerformanceReport) -> Result<()> {
    let mut w = csv_writer(dir, "orbit_marginal.csv")?;
    w.write_record(["R", "p_R"])?;
    for (r, p) in report.orbit_marginal.iter().enumerate() {
        w.write_record([r.to_string(), p.to_string()])?;
    }
    w.flush()?;

    let mut w = csv_writer(dir, "inventory_marginal.csv")?;
    w.write_record(["I", "p_I"])?;
    for (i, p) in model.policy().levels().zip(&report.inventory_marginal) {
        w.write_record([i.to_string(), p.to_string()])?;
    }
    w.flush()?;

    let mut w = csv_writer(dir, "distribution.csv")?;
    w.write_record(["R", "I", "status", "Z", "probability"])?;
    for (r, phase, p) in distribution_rows(steady, model) {
        w.write_record([
            r.to_string(),
            phase.inventory.to_string(),
            phase.status.label().to_string(),
            phase.env.to_string(),
            p.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_blocks(dir: &Path, model: &Model, blocks: &LevelBlocks) -> Result<()> {
    let level = blocks.level;
    let mut parts = vec![("A0", &blocks.up), ("A1", &blocks.local)];
    if let Some(d) = &blocks.down {
        parts.push(("A2", d));
    }
    for (name, block) in parts {
        let path = dir.join(format!("block_{name}_level{level}.csv"));
        let mut file = BufWriter::new(File::create(&path).with_context(|| format!("cannot write {}", path.display()))?);
        write_block_csv(&mut file, block, model.phases())?;
    }
    Ok(())
}

pub fn write_simulation(dir: &Path, est: &SimEstimates) -> Result<()> {
    let mut w = csv_writer(dir, "replications.csv")?;
    w.write_record([
        "replication",
        "p_idle",
        "p_busy",
        "p_failed",
        "L_R",
        "L",
        "lambda_bar",
        "W_R",
        "W",
        "B_inv",
        "events",
        "max_orbit",
    ])?;
    for r in &est.replications {
        w.write_record([
            r.replication.to_string(),
            r.p_idle.to_string(),
            r.p_busy.to_string(),
            r.p_failed.to_string(),
            r.l_r.to_string(),
            r.l.to_string(),
            r.lambda_bar.to_string(),
            r.w_r().to_string(),
            r.w().to_string(),
            r.b_inv.to_string(),
            r.events.to_string(),
            r.max_orbit.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(dir, "sim_orbit_marginal.csv")?;
    w.write_record(["R", "p_R", "ci_halfwidth"])?;
    for (r, e) in est.orbit_marginal.iter().enumerate() {
        let h = e.half_width.map(|h| h.to_string()).unwrap_or_default();
        w.write_record([r.to_string(), e.mean.to_string(), h])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    let path = dir.join(name);
    if !path.exists() {
        anyhow::bail!(
            "missing artifact {}: run `{}` with --out {} first",
            path.display(),
            if name == REPORT_JSON { "solve" } else { "simulate" },
            dir.display()
        );
    }
    let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))
}
