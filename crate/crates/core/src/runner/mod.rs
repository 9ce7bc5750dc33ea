//! Experiment configuration, seeded replicates and CSV artifacts.

pub mod config;
mod output;
mod run;

use std::path::Path;

pub use config::{parse_config, AlgorithmKind, ExperimentConfig, ReferenceSource};
pub use output::{
    read_dos, read_to_string, read_trace, trace_rows, write_dos, write_epsilon_mean, write_file,
    write_heat_curve, write_runs, write_summary, write_trace, DosTable, TraceRow,
};
pub use run::{
    run_replicates, run_single, EpsilonPoint, Event, EventKind, Experiment, PrepareOptions,
    RunTrace, RunningStats, Sample, Summary, DEFAULT_DISCOVERY_SWEEPS,
};
pub use crate::thermo::specific_heat_curve;

use crate::error::Result;

/// Writes the artifacts of a set of runs into `dir`:
///
/// * `trace_seed<S>.csv` and `dos_seed<S>.csv` for every seed,
/// * `runs.csv` and `summary.csv`,
/// * `epsilon_mean.csv` when a reference was available.
pub fn write_run_outputs(experiment: &Experiment, traces: &[RunTrace], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let energies = experiment.ladder().levels();
    for t in traces {
        write_file(&dir.join(format!("trace_seed{}.csv", t.seed)), |b| write_trace(t, b))?;
        if !t.final_u.is_empty() {
            write_file(&dir.join(format!("dos_seed{}.csv", t.seed)), |b| {
                write_dos(energies, &t.final_u, b)
            })?;
        }
    }
    let summary = Summary::from_traces(traces);
    write_file(&dir.join("runs.csv"), |b| write_runs(traces, b))?;
    write_file(&dir.join("summary.csv"), |b| write_summary(&summary, b))?;
    if experiment.reference().is_some() {
        write_file(&dir.join("epsilon_mean.csv"), |b| write_epsilon_mean(&summary, b))?;
    }
    Ok(())
}
