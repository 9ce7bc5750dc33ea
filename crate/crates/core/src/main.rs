use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use awl::runner::{
    parse_config, read_dos, read_to_string, specific_heat_curve, write_dos, write_file,
    write_heat_curve, write_run_outputs, Experiment, PrepareOptions, Summary,
    DEFAULT_DISCOVERY_SWEEPS,
};
use awl::model::ENUMERATION_LIMIT;
use awl::oracle::enumerate_dos;
use awl::thermo::{epsilon_error, l2_error, Anchor, TemperatureGrid};
use awl::{Error, Result};

/// Wang-Landau and momentum-accelerated Wang-Landau density-of-states estimation.
#[derive(Parser, Debug)]
#[command(name = "awl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every seed of a config and write traces, DOS estimates and summaries.
    Run {
        config: PathBuf,
        /// Added to every seed in the config.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Sweeps used to discover the energy ladder of large Potts lattices.
        #[arg(long, default_value_t = DEFAULT_DISCOVERY_SWEEPS)]
        discovery_sweeps: u64,
        /// Fail instead of warning when the ladder could not be enumerated.
        #[arg(long)]
        strict_ladder: bool,
    },
    /// Enumerate the exact log-DOS of the configured model.
    Dos {
        config: PathBuf,
        /// Output file (default: `dos_exact.csv` in the config's output directory).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Specific heat curve from a DOS file.
    Heat {
        dos: PathBuf,
        #[arg(long, default_value_t = 0.4)]
        t_start: f64,
        #[arg(long, default_value_t = 8.0)]
        t_stop: f64,
        #[arg(long, default_value_t = 0.1)]
        t_step: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Error metrics of a DOS file against a reference DOS file.
    Error {
        dos: PathBuf,
        reference: PathBuf,
        #[arg(long, default_value = "sum_to_one")]
        anchor: String,
    },
}

fn emit<F>(output: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    match output {
        Some(path) => write_file(path, f),
        None => {
            let mut buf = Vec::new();
            f(&mut buf)?;
            std::io::stdout().write_all(&buf)?;
            Ok(())
        }
    }
}

fn load_config(path: &Path) -> Result<awl::runner::ExperimentConfig> {
    let text = read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::ConfigLine { line, message } => Error::Format {
            path: path.to_path_buf(),
            message: format!("line {line}: {message}"),
        },
        other => other,
    })
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            seed_offset,
            jobs,
            discovery_sweeps,
            strict_ladder,
        } => {
            let mut cfg = load_config(&config)?;
            for s in &mut cfg.seeds {
                *s = s.checked_add(seed_offset).ok_or_else(|| {
                    Error::Config(format!("seed {s} plus offset {seed_offset} overflows"))
                })?;
            }
            let exp = Experiment::prepare_with(
                cfg,
                PrepareOptions {
                    discovery_sweeps,
                    strict_ladder,
                },
            )?;
            let jobs = jobs.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let traces = exp.run_replicates(jobs)?;
            let dir = exp.config().output_dir.clone();
            write_run_outputs(&exp, &traces, &dir)?;
            let summary = Summary::from_traces(&traces);
            eprintln!(
                "{} runs, {} equilibrated, mean first equilibration {} sweeps; output in {}",
                summary.runs,
                summary.equilibrated_runs,
                summary
                    .first_equilibration
                    .mean()
                    .map_or("n/a".to_string(), |m| format!("{m:.1}")),
                dir.display()
            );
            Ok(())
        }
        Command::Dos { config, output } => {
            let cfg = load_config(&config)?;
            let exact = enumerate_dos(cfg.model, ENUMERATION_LIMIT)?;
            let path = output.unwrap_or_else(|| cfg.output_dir.join("dos_exact.csv"));
            write_file(&path, |b| write_dos(exact.ladder.levels(), &exact.log_g, b))?;
            eprintln!("{} levels written to {}", exact.ladder.len(), path.display());
            Ok(())
        }
        Command::Heat {
            dos,
            t_start,
            t_stop,
            t_step,
            output,
        } => {
            let table = read_dos(&dos)?;
            let grid = TemperatureGrid::new(t_start, t_stop, t_step)?;
            let curve = specific_heat_curve(&table.log_g, &table.energies_f64(), &grid)?;
            emit(output.as_deref(), |b| write_heat_curve(&curve, b))
        }
        Command::Error {
            dos,
            reference,
            anchor,
        } => {
            let anchor: Anchor = anchor.parse()?;
            let est = read_dos(&dos)?;
            let refr = read_dos(&reference)?;
            if est.energies != refr.energies {
                return Err(Error::Format {
                    path: dos,
                    message: "energies differ from the reference".into(),
                });
            }
            let eps = epsilon_error(&est.log_g, &refr.log_g, &refr.energies, anchor)?;
            let l2 = l2_error(&est.log_g, &refr.log_g)?;
            println!("epsilon,l2");
            println!("{eps:e},{l2:e}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
