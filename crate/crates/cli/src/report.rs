//! Markdown summary of result records.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use daps::analysis::Variable;
use daps::estimator::EstimateWithError;

use crate::error::CliResult;
use crate::io::{read_json, write_atomic};
use crate::records::Record;

fn pm(e: &EstimateWithError<f64>) -> String {
    format!("{:.5} ± {:.5}", e.mean, e.delta)
}

fn variable_name(v: Variable) -> &'static str {
    match v {
        Variable::RawIntensity => "|beta|^2",
        Variable::DetectorIndependent => "|beta_DI|^2",
    }
}

fn significance(s: f64) -> String {
    if s.is_finite() {
        format!("{s:.1}")
    } else {
        format!("{s}")
    }
}

pub fn render(records: &[(PathBuf, Record)]) -> String {
    let mut md = String::from("# DAPS analysis report\n");
    for (path, record) in records {
        let _ = writeln!(md, "\n## {}\n", path.display());
        match record {
            Record::Estimate(r) => {
                let s = &r.summary;
                let _ = writeln!(
                    md,
                    "Estimates for `{}` ({} settings).\n",
                    r.source,
                    r.settings.len()
                );
                let _ = writeln!(
                    md,
                    "| quantity | value | setting | sd below 0 |\n|---|---|---|---|"
                );
                let _ = writeln!(
                    md,
                    "| g_min | {} | {} | {} |",
                    pm(&s.g_min),
                    s.g_min_setting,
                    significance(s.g_min_significance)
                );
                let _ = writeln!(
                    md,
                    "| mu_min | {} | {} | {} |",
                    pm(&s.mu_min),
                    s.mu_min_setting,
                    significance(s.mu_min_significance)
                );
                if let Some(first) = r.settings.first() {
                    for (z, g) in r.z_values.iter().zip(&first.gz) {
                        let _ = writeln!(
                            md,
                            "| G_z(beta={}) at z={z} | {} | {} | |",
                            first.beta,
                            pm(g),
                            first.index
                        );
                    }
                }
            }
            Record::Fit(r) => {
                let _ = writeln!(
                    md,
                    "Fit of `{}` at z = {} against {}.\n\n- vacuum: b = {:.6}, f = {:?}, chi^2 = {:.4}\n- signal: b = {:.6}, f = {:?}, chi^2 = {:.4}{}",
                    r.source,
                    r.z,
                    variable_name(r.variable),
                    r.vacuum.model.b,
                    r.vacuum.model.f,
                    r.vacuum.chi_squared,
                    r.signal.model.b,
                    r.signal.model.f,
                    r.signal.chi_squared,
                    if r.fixed_decay { " (decay fixed)" } else { "" }
                );
            }
            Record::Prediction(r) => {
                let worst = r
                    .points
                    .iter()
                    .filter_map(|p| p.z_score)
                    .map(f64::abs)
                    .fold(0.0, f64::max);
                let _ = writeln!(
                    md,
                    "Vacuum-anchored prediction for `{}` at z = {}: {:.1}% of settings within 3 delta, largest |z-score| {:.2}.",
                    r.source,
                    r.z,
                    100.0 * r.fraction_within_3_delta,
                    worst
                );
            }
            Record::Discrimination(r) => {
                let _ = writeln!(md, "Discrimination probabilities at z = {}.\n", r.z);
                let _ = writeln!(md, "| | {} |", r.labels.join(" | "));
                let _ = writeln!(md, "|---|{}", "---|".repeat(r.labels.len()));
                for (label, row) in r.labels.iter().zip(&r.probabilities) {
                    let cells: Vec<String> =
                        row.iter().map(|p| format!("{:.1}%", 100.0 * p)).collect();
                    let _ = writeln!(md, "| {label} | {} |", cells.join(" | "));
                }
            }
            Record::OptimalZ(r) => {
                let _ = writeln!(
                    md,
                    "Optimal z for `{}`: z* = {}, G = {}, {} sd below 0{}.",
                    r.source,
                    r.z,
                    pm(&r.estimate),
                    significance(r.significance),
                    if r.nonnegative {
                        " (no negative value on the grid)"
                    } else {
                        ""
                    }
                );
            }
        }
    }
    md
}

pub fn run(inputs: &[PathBuf], output: &Path) -> CliResult<()> {
    let records = inputs
        .iter()
        .map(|p| Ok((p.clone(), read_json::<Record>(p)?)))
        .collect::<CliResult<Vec<_>>>()?;
    write_atomic(output, render(&records).as_bytes())
}
