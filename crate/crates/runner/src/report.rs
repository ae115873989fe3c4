//! Tables, hypothesis tests and figures built from a runs file.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Result, RunnerError};
use crate::harness::{
    aggregate, ols_trend, sensitivity_report, t_test_one_sample, CellSummary, Factor, RunRecord,
    SensitivityReport, TTest, Trend,
};
use crate::io::{create, write_summary};
use crate::svg;

/// Grouping of each table, in output order.
pub const TABLES: [(&str, &[Factor]); 3] = [
    ("by_method", &[Factor::Method]),
    ("by_effect_method", &[Factor::Effect, Factor::Method]),
    ("by_lambda_method", &[Factor::Lambda, Factor::Method]),
];

#[derive(Debug, Clone, Serialize)]
pub struct RunCounts {
    pub total: usize,
    pub ok: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub cell: String,
    pub rep: usize,
    pub seed: u64,
    pub status: String,
}

/// Contents of `tests.json`. Statistics that cannot be computed from the
/// given runs are `null`, with the reason listed under `notes`.
#[derive(Debug, Clone, Serialize)]
pub struct TestsSummary {
    pub runs: RunCounts,
    pub overall: Option<TTest>,
    pub by_method: IndexMap<String, Option<TTest>>,
    pub trend: Option<Trend>,
    pub sensitivity: Option<SensitivityReport>,
    pub notes: Vec<String>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub tables: Vec<(&'static str, Vec<CellSummary>)>,
    pub tests: TestsSummary,
}

fn keep<T>(label: &str, r: Result<T>, notes: &mut Vec<String>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{label}: {e}"));
            None
        }
    }
}

pub fn build(records: &[RunRecord]) -> Result<Report> {
    if records.is_empty() {
        return Err(RunnerError::Data("runs file has no rows".into()));
    }
    let ok: Vec<&RunRecord> = records.iter().filter(|r| r.is_ok()).collect();
    if ok.is_empty() {
        return Err(RunnerError::Data("runs file has no successful runs".into()));
    }
    let mut tables = Vec::new();
    for (name, factors) in TABLES {
        tables.push((name, aggregate(records, factors)?));
    }

    let mut notes = Vec::new();
    let deltas: Vec<f64> = ok.iter().filter_map(|r| r.delta_l()).collect();
    let overall = keep("overall", t_test_one_sample(&deltas), &mut notes);
    let mut by_method = IndexMap::new();
    for r in &ok {
        let name = r.cell.method.as_str();
        if by_method.contains_key(name) {
            continue;
        }
        let d: Vec<f64> = ok
            .iter()
            .filter(|o| o.cell.method == r.cell.method)
            .filter_map(|o| o.delta_l())
            .collect();
        by_method.insert(
            name.to_string(),
            keep(name, t_test_one_sample(&d), &mut notes),
        );
    }
    let trend = keep("trend", ols_trend(records), &mut notes);
    let sensitivity = keep("sensitivity", sensitivity_report(records), &mut notes);
    let failures = records
        .iter()
        .filter(|r| !r.is_ok())
        .map(|r| Failure {
            cell: r.cell.canonical(),
            rep: r.rep,
            seed: r.seed,
            status: r.status.label(),
        })
        .collect();
    let tests = TestsSummary {
        runs: RunCounts {
            total: records.len(),
            ok: ok.len(),
            failed: records.len() - ok.len(),
        },
        overall,
        by_method,
        trend,
        sensitivity,
        notes,
        failures,
    };
    Ok(Report { tables, tests })
}

fn cell_text(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.5}")).unwrap_or_else(|| "NA".into())
}

/// Fixed-width text rendering of a summary table.
pub fn render_table(summaries: &[CellSummary]) -> String {
    let Some(first) = summaries.first() else {
        return String::new();
    };
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut header: Vec<String> = first
        .keys
        .iter()
        .map(|(f, _)| f.name().to_string())
        .collect();
    header.extend(["n_runs", "mean_delta", "sd_delta", "se_delta"].map(String::from));
    rows.push(header);
    for s in summaries {
        let mut row: Vec<String> = s.keys.iter().map(|(_, v)| v.clone()).collect();
        row.push(s.n_runs.to_string());
        row.push(cell_text(Some(s.mean_delta)));
        row.push(cell_text(s.sd_delta));
        row.push(cell_text(s.se_delta));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| RunnerError::io(path, e))
}

/// Writes every table, `tests.json` and the four figures into `dir`.
pub fn write_report(dir: &Path, records: &[RunRecord]) -> Result<Report> {
    let report = build(records)?;
    fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;
    for (name, summaries) in &report.tables {
        write_summary(create(&dir.join(format!("{name}.csv")))?, summaries)?;
        write_text(&dir.join(format!("{name}.txt")), &render_table(summaries))?;
    }
    let json = serde_json::to_string_pretty(&report.tests)
        .map_err(|e| RunnerError::Data(e.to_string()))?;
    write_text(&dir.join("tests.json"), &(json + "\n"))?;

    let table = |name: &str| {
        report
            .tables
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, s)| s.as_slice())
            .unwrap_or(&[])
    };
    write_text(&dir.join("delta_hist.svg"), &svg::delta_histogram(records))?;
    write_text(
        &dir.join("delta_vs_n.svg"),
        &svg::delta_vs_n(records, report.tests.trend.as_ref()),
    )?;
    write_text(
        &dir.join("effect_method.svg"),
        &svg::grouped_bars(
            "Mean ΔL by effect size",
            table("by_effect_method"),
            Factor::Effect,
            Factor::Method,
        ),
    )?;
    write_text(
        &dir.join("lambda_method.svg"),
        &svg::grouped_bars(
            "Mean ΔL by intervention cost",
            table("by_lambda_method"),
            Factor::Lambda,
            Factor::Method,
        ),
    )?;
    Ok(report)
}
