//! CSV and JSON artifacts: run records, cell summaries, two-column samples
//! and the run manifest.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use causal_averaging_core::synth::{BivariateSample, CausalStructure};
use serde::{Deserialize, Serialize};

use crate::config::{parse_named, SimulationConfig};
use crate::error::{Result, RunnerError};
use crate::harness::{Cell, CellSummary, RunOutcome, RunRecord, RunStatus};

pub const RUNS_HEADER: [&str; 13] = [
    "n",
    "dgp",
    "effect",
    "lambda",
    "method",
    "rep",
    "truth",
    "p_forward",
    "loss_ms",
    "loss_ma",
    "delta_l",
    "seed",
    "status",
];

/// Reals are written with 17 significant digits, which round-trips.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> RunnerError {
    RunnerError::Data(e.to_string())
}

pub fn write_runs<W: Write>(w: W, records: &[RunRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RUNS_HEADER).map_err(csv_err)?;
    for r in records {
        let num = |f: fn(&RunOutcome) -> f64| {
            r.outcome
                .as_ref()
                .map(|o| fmt_real(f(o)))
                .unwrap_or_default()
        };
        out.write_record([
            r.cell.n.to_string(),
            r.cell.dgp.as_str().into(),
            r.cell.effect.as_str().into(),
            fmt_real(r.cell.lambda),
            r.cell.method.as_str().into(),
            r.rep.to_string(),
            r.truth.as_str().into(),
            num(|o| o.p_forward),
            num(|o| o.loss_ms),
            num(|o| o.loss_ma),
            num(|o| o.delta_l),
            r.seed.to_string(),
            r.status.label(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| RunnerError::Data(e.to_string()))?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    row[i].parse().map_err(|_| {
        RunnerError::Data(format!(
            "line {line}: bad {} value `{}`",
            RUNS_HEADER[i], &row[i]
        ))
    })
}

pub fn read_runs<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(RUNS_HEADER.iter().copied()) {
        return Err(RunnerError::Data(format!(
            "runs file header must be `{}`",
            RUNS_HEADER.join(",")
        )));
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let named = |i: usize| -> Result<String> { Ok(row[i].to_string()) };
        let bad = |i: usize, msg: String| {
            RunnerError::Data(format!("line {line}: {} {msg}", RUNS_HEADER[i]))
        };
        let cell = Cell {
            n: parse_field(&row, 0, line)?,
            dgp: parse_named(&named(1)?).map_err(|m| bad(1, m))?,
            effect: parse_named(&named(2)?).map_err(|m| bad(2, m))?,
            lambda: parse_field(&row, 3, line)?,
            method: parse_named(&named(4)?).map_err(|m| bad(4, m))?,
        };
        let truth = match &row[6] {
            "forward" => CausalStructure::Forward,
            "backward" => CausalStructure::Backward,
            other => return Err(bad(6, format!("`{other}` is not forward/backward"))),
        };
        let status = RunStatus::parse(&row[12])
            .ok_or_else(|| bad(12, format!("`{}` is not a status", &row[12])))?;
        let outcome = if status == RunStatus::Ok {
            Some(RunOutcome {
                p_forward: parse_field(&row, 7, line)?,
                loss_ms: parse_field(&row, 8, line)?,
                loss_ma: parse_field(&row, 9, line)?,
                delta_l: parse_field(&row, 10, line)?,
            })
        } else {
            None
        };
        records.push(RunRecord {
            cell,
            rep: parse_field(&row, 5, line)?,
            truth,
            outcome,
            seed: parse_field(&row, 11, line)?,
            status,
        });
    }
    Ok(records)
}

pub fn write_summary<W: Write>(w: W, summaries: &[CellSummary]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let Some(first) = summaries.first() else {
        return Err(RunnerError::Data("no summary rows".into()));
    };
    let mut header: Vec<&str> = first.keys.iter().map(|(f, _)| f.name()).collect();
    header.extend(["n_runs", "mean_delta", "sd_delta", "se_delta"]);
    out.write_record(&header).map_err(csv_err)?;
    for s in summaries {
        let mut row: Vec<String> = s.keys.iter().map(|(_, v)| v.clone()).collect();
        row.push(s.n_runs.to_string());
        row.push(fmt_real(s.mean_delta));
        row.push(s.sd_delta.map(fmt_real).unwrap_or_default());
        row.push(s.se_delta.map(fmt_real).unwrap_or_default());
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush().map_err(|e| RunnerError::Data(e.to_string()))?;
    Ok(())
}

/// Reads a two-column `x,y` sample with a header row.
pub fn read_sample<R: Read>(r: R) -> Result<BivariateSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.len() != 2 || &header[0] != "x" || &header[1] != "y" {
        return Err(RunnerError::Data("sample file header must be `x,y`".into()));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize| -> Result<f64> {
            let v: f64 = row[i].parse().map_err(|_| {
                RunnerError::Data(format!("line {line}: `{}` is not a number", &row[i]))
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(RunnerError::Data(format!("line {line}: non-finite value")))
            }
        };
        x.push(get(0)?);
        y.push(get(1)?);
    }
    BivariateSample::new(x, y).map_err(|e| RunnerError::Data(e.to_string()))
}

pub fn write_sample<W: Write>(w: W, sample: &BivariateSample) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y"]).map_err(csv_err)?;
    for (a, b) in sample.x().iter().zip(sample.y()) {
        out.write_record([fmt_real(*a), fmt_real(*b)])
            .map_err(csv_err)?;
    }
    out.flush().map_err(|e| RunnerError::Data(e.to_string()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub master_seed: u64,
    pub config: SimulationConfig,
}

impl Manifest {
    pub fn new(config: &SimulationConfig) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.master_seed,
            config: config.clone(),
        }
    }
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| RunnerError::io(path, e))
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| RunnerError::io(path, e))
}
