//! CSV artifacts: traces, DOS files, heat curves and summaries.
//!
//! Floats are written in their shortest round-trip form so output is byte-stable
//! for fixed input and re-reads to identical values.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::run::{EventKind, RunTrace, Summary};
use crate::error::{Error, Result};

pub(crate) fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// One row of a trace file.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub sweep: f64,
    pub eta: f64,
    pub epsilon: Option<f64>,
    pub l2: Option<f64>,
    pub event: String,
}

/// Rows of a trace in file order: by iteration, events before the sample taken
/// at the same sweep.
pub fn trace_rows(trace: &RunTrace) -> Vec<TraceRow> {
    let mut rows: Vec<(u64, u8, TraceRow)> = Vec::new();
    for ev in &trace.events {
        rows.push((
            ev.iteration,
            0,
            TraceRow {
                sweep: ev.sweep,
                eta: ev.eta,
                epsilon: None,
                l2: None,
                event: ev.kind.name().to_string(),
            },
        ));
    }
    for s in &trace.samples {
        rows.push((
            s.iteration,
            1,
            TraceRow {
                sweep: s.sweep as f64,
                eta: s.eta,
                epsilon: s.epsilon,
                l2: s.l2,
                event: String::new(),
            },
        ));
    }
    rows.sort_by_key(|&(it, order, _)| (it, order));
    rows.into_iter().map(|(_, _, r)| r).collect()
}

pub fn write_trace<W: Write>(trace: &RunTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep", "eta", "epsilon", "l2", "event"])?;
    for r in trace_rows(trace) {
        w.write_record([
            fmt_f64(r.sweep),
            fmt_f64(r.eta),
            opt(r.epsilon),
            opt(r.l2),
            r.event,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn open_csv(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let mut r = csv::Reader::from_path(path)?;
    let got: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if got != header {
        return Err(format_error(
            path,
            format!("expected header `{}`, found `{}`", header.join(","), got.join(",")),
        ));
    }
    Ok(r)
}

fn parse_field<T: std::str::FromStr>(path: &Path, row: usize, field: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| format_error(path, format!("row {row}: cannot parse `{field}`")))
}

fn parse_optional(path: &Path, row: usize, field: &str) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_field(path, row, field).map(Some)
    }
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = open_csv(path, &["sweep", "eta", "epsilon", "l2", "event"])?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        rows.push(TraceRow {
            sweep: parse_field(path, row, &rec[0])?,
            eta: parse_field(path, row, &rec[1])?,
            epsilon: parse_optional(path, row, &rec[2])?,
            l2: parse_optional(path, row, &rec[3])?,
            event: rec[4].trim().to_string(),
        });
    }
    Ok(rows)
}

/// A DOS file: energies (ascending) and log-DOS values.
#[derive(Clone, Debug, PartialEq)]
pub struct DosTable {
    pub energies: Vec<i64>,
    pub log_g: Vec<f64>,
}

impl DosTable {
    pub fn energies_f64(&self) -> Vec<f64> {
        self.energies.iter().map(|&e| e as f64).collect()
    }
}

pub fn write_dos<W: Write>(energies: &[i64], log_g: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["energy", "log_g"])?;
    for (e, g) in energies.iter().zip(log_g) {
        w.write_record([e.to_string(), fmt_f64(*g)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dos(path: &Path) -> Result<DosTable> {
    let mut r = open_csv(path, &["energy", "log_g"])?;
    let mut table = DosTable {
        energies: Vec::new(),
        log_g: Vec::new(),
    };
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let e: i64 = parse_field(path, row, &rec[0])?;
        let g: f64 = parse_field(path, row, &rec[1])?;
        if !g.is_finite() {
            return Err(format_error(path, format!("row {row}: log_g must be finite")));
        }
        if table.energies.last().is_some_and(|&prev| prev >= e) {
            return Err(format_error(path, format!("row {row}: energies must be strictly ascending")));
        }
        table.energies.push(e);
        table.log_g.push(g);
    }
    if table.energies.is_empty() {
        return Err(format_error(path, "no levels"));
    }
    Ok(table)
}

pub fn write_heat_curve<W: Write>(curve: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["T", "C"])?;
    for &(t, c) in curve {
        w.write_record([fmt_f64(t), fmt_f64(c)])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-run statistics, including wall time.
pub fn write_runs<W: Write>(traces: &[RunTrace], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed",
        "first_equilibration_sweeps",
        "equilibrations",
        "total_iterations",
        "final_epsilon",
        "wall_time_seconds",
    ])?;
    for t in traces {
        w.write_record([
            t.seed.to_string(),
            t.first_equilibration_sweeps
                .map(|s| s.to_string())
                .unwrap_or_default(),
            t.equilibration_events().count().to_string(),
            t.total_iterations.to_string(),
            opt(t.samples.last().and_then(|s| s.epsilon)),
            fmt_f64(t.wall_time_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(summary: &Summary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["statistic", "value"])?;
    let rows = [
        ("runs", summary.runs.to_string()),
        ("equilibrated_runs", summary.equilibrated_runs.to_string()),
        (
            "mean_first_equilibration_sweeps",
            opt(summary.first_equilibration.mean()),
        ),
        (
            "std_first_equilibration_sweeps",
            opt(summary.first_equilibration.std()),
        ),
        ("mean_wall_time_seconds", opt(summary.wall_time.mean())),
        ("std_wall_time_seconds", opt(summary.wall_time.std())),
    ];
    for (k, v) in rows {
        w.write_record([k.to_string(), v])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean ε trajectory: `sweep,epsilon,runs`.
pub fn write_epsilon_mean<W: Write>(summary: &Summary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep", "epsilon", "runs"])?;
    for p in &summary.mean_epsilon {
        w.write_record([p.sweep.to_string(), fmt_f64(p.epsilon), p.runs.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `contents` produced by `f` to `path`, creating parent directories.
pub fn write_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    File::create(path)?.write_all(&buf)?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Halved => "halved",
            EventKind::OneOverT => "one_over_t",
            EventKind::Stop => "stop",
        }
    }
}
