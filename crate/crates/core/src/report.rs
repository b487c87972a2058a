//! Plain-text tables and flat rows for CSV export.

use std::fmt::Write;

use crate::measures::PerformanceReport;
use crate::model::{Model, Phase};
use crate::simulator::{Estimate, SimEstimates};
use crate::solver::SteadyState;
use crate::stability::StabilityReport;

/// Column headers of the measures table.
pub const MEASURE_COLUMNS: [&str; 9] = ["Idle", "Busy", "Failure", "L_R", "L", "W_R", "W", "B_inv", "D_S"];

/// `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("float formatting round-trips");
    let exp = rounded.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        return format!("{rounded:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

fn opt_sig6(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_else(|| "n/a".into())
}

fn render_rows(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn measure_values(r: &PerformanceReport) -> [f64; 9] {
    [r.p_idle, r.p_busy, r.p_failed, r.l_r, r.l, r.w_r, r.w, r.b_inv, r.d_s]
}

pub fn sim_measure_values(e: &SimEstimates) -> [Estimate; 9] {
    [e.p_idle, e.p_busy, e.p_failed, e.l_r, e.l, e.w_r, e.w, e.b_inv, e.d_s]
}

pub fn render_report_table(r: &PerformanceReport) -> String {
    let header = MEASURE_COLUMNS.iter().map(|s| s.to_string()).collect();
    let values = measure_values(r).iter().map(|v| sig6(*v)).collect();
    let mut out = render_rows(&[header, values]);
    out.push('\n');
    out += &render_rows(&[
        vec!["lambda_bar".into(), sig6(r.lambda_bar)],
        vec!["B_inv (uniform)".into(), sig6(r.b_inv_uniform)],
        vec!["truncation".into(), r.truncation.to_string()],
        vec!["tail_mass_bound".into(), opt_sig6(r.tail_mass_bound)],
    ]);
    out
}

pub fn render_sim_table(e: &SimEstimates) -> String {
    let mut rows = vec![vec!["measure".to_string(), "estimate".into(), "ci_halfwidth".into()]];
    for (name, est) in MEASURE_COLUMNS.iter().zip(sim_measure_values(e)) {
        rows.push(vec![name.to_string(), sig6(est.mean), opt_sig6(est.half_width)]);
    }
    let mut out = render_rows(&rows);
    let _ = writeln!(
        out,
        "\n{} replications, horizon {}, warmup {}, seed {}",
        e.config.replications,
        sig6(e.config.horizon),
        sig6(e.config.warmup),
        e.config.seed
    );
    out
}

/// One line of the analytic-versus-simulated comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub measure: &'static str,
    pub analytic: f64,
    pub simulated: Estimate,
    /// `(simulated - analytic) / analytic`; `None` when the analytic value is 0.
    pub rel_diff: Option<f64>,
    pub covered: bool,
}

pub fn compare(analytic: &PerformanceReport, sim: &SimEstimates) -> Vec<ComparisonRow> {
    MEASURE_COLUMNS
        .iter()
        .zip(measure_values(analytic))
        .zip(sim_measure_values(sim))
        .map(|((&measure, a), s)| ComparisonRow {
            measure,
            analytic: a,
            simulated: s,
            rel_diff: (a != 0.0).then(|| (s.mean - a) / a),
            covered: s.covers(a),
        })
        .collect()
}

pub fn render_comparison(rows: &[ComparisonRow]) -> String {
    let mut table = vec![vec![
        "measure".to_string(),
        "analytic".into(),
        "simulated".into(),
        "ci_halfwidth".into(),
        "rel_diff".into(),
        "covered".into(),
    ]];
    for r in rows {
        table.push(vec![
            r.measure.to_string(),
            sig6(r.analytic),
            sig6(r.simulated.mean),
            opt_sig6(r.simulated.half_width),
            opt_sig6(r.rel_diff),
            if r.covered { "yes" } else { "no" }.into(),
        ]);
    }
    render_rows(&table)
}

pub fn render_stability(report: &StabilityReport) -> String {
    let mut out = render_rows(&[
        vec!["rho".into(), sig6(report.rho)],
        vec!["D_closed".into(), sig6(report.closed_form_drift)],
        vec!["D*".into(), opt_sig6(report.numerical_drift)],
        vec!["D* (decoupled)".into(), sig6(report.decoupled_drift)],
        vec!["verdict".into(), report.verdict.label().into()],
    ]);
    if report.drift_sign_disagreement {
        out += "warning: sign of D* differs from sign of D_closed\n";
    }
    out.push('\n');
    let mut rows = vec![vec!["z".to_string(), "rho_z".into()]];
    for (z, r) in report.rho_per_state.iter().enumerate() {
        rows.push(vec![(z + 1).to_string(), sig6(*r)]);
    }
    out += &render_rows(&rows);
    out
}

/// `(R, phase, probability)` for every state of the truncated distribution.
pub fn distribution_rows<'a>(
    steady: &'a SteadyState,
    model: &'a Model,
) -> impl Iterator<Item = (usize, Phase, f64)> + 'a {
    steady.levels.iter().enumerate().flat_map(move |(r, p)| {
        model
            .phases()
            .iter()
            .zip(p.iter())
            .map(move |(phase, &v)| (r, phase, v))
    })
}
