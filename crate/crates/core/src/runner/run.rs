//! Single runs and seeded replicates.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ReferenceSource};
use super::output::read_dos;
use crate::error::{invalid, Error, Result};
use crate::estimator::{AdaptEvent, Estimator, ScheduleState};
use crate::model::{discover_ladder, ising_ladder, EnergyLadder, LadderSource, ModelKind, SpinLattice, ENUMERATION_LIMIT};
use crate::oracle::enumerate_dos;
use crate::sampler::metropolis_step;
use crate::thermo::{epsilon_error, l2_error};

/// Sweeps of exploratory sampling used to find the energy ladder of models too
/// large to enumerate.
pub const DEFAULT_DISCOVERY_SWEEPS: u64 = 20_000;

// Fixed so that the discovered ladder does not depend on the run seeds.
const DISCOVERY_SEED: u64 = 0x5eed_1add_e500_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrepareOptions {
    pub discovery_sweeps: u64,
    /// Refuse to run on a ladder that was sampled rather than enumerated.
    pub strict_ladder: bool,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            discovery_sweeps: DEFAULT_DISCOVERY_SWEEPS,
            strict_ladder: false,
        }
    }
}

/// A validated config with its energy ladder and optional reference log-DOS.
#[derive(Clone, Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    ladder: EnergyLadder,
    ladder_source: LadderSource,
    reference: Option<Vec<f64>>,
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        Self::prepare_with(config, PrepareOptions::default())
    }

    pub fn prepare_with(config: ExperimentConfig, options: PrepareOptions) -> Result<Self> {
        config.validate()?;
        let spec = config.model;
        let (ladder, ladder_source) = match spec.kind() {
            ModelKind::Ising => (ising_ladder(spec.side())?, LadderSource::Enumerated),
            ModelKind::Potts => {
                let mut rng = ChaCha8Rng::seed_from_u64(DISCOVERY_SEED);
                discover_ladder(spec, options.discovery_sweeps, &mut rng)?
            }
        };
        if ladder_source == LadderSource::Explored {
            let msg = format!(
                "energy ladder of {} levels was found by sampling {} sweeps and may be incomplete",
                ladder.len(),
                options.discovery_sweeps
            );
            if options.strict_ladder {
                return Err(Error::Config(msg));
            }
            eprintln!("warning: {msg}");
        }

        let reference = match &config.reference_dos {
            None => None,
            Some(ReferenceSource::Exact) => {
                let exact = enumerate_dos(spec, ENUMERATION_LIMIT)?;
                if exact.ladder != ladder {
                    return Err(Error::Config(
                        "enumerated energies differ from the sampling ladder".into(),
                    ));
                }
                Some(exact.log_g)
            }
            Some(ReferenceSource::File(path)) => {
                let table = read_dos(path)?;
                if table.energies != ladder.levels() {
                    return Err(Error::Format {
                        path: path.clone(),
                        message: format!(
                            "reference has {} energies that do not match the {}-level ladder of the model",
                            table.energies.len(),
                            ladder.len()
                        ),
                    });
                }
                Some(table.log_g)
            }
        };
        Ok(Experiment {
            config,
            ladder,
            ladder_source,
            reference,
        })
    }

    /// Replaces the reference log-DOS (one value per ladder level).
    pub fn with_reference(mut self, reference: Vec<f64>) -> Result<Self> {
        if reference.len() != self.ladder.len() {
            return Err(invalid(format!(
                "reference has {} levels, the ladder has {}",
                reference.len(),
                self.ladder.len()
            )));
        }
        self.reference = Some(reference);
        Ok(self)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn ladder(&self) -> &EnergyLadder {
        &self.ladder
    }

    pub fn ladder_source(&self) -> LadderSource {
        self.ladder_source
    }

    pub fn reference(&self) -> Option<&[f64]> {
        self.reference.as_deref()
    }

    /// One run. Walker `w` draws from ChaCha8 stream `w` of `seed`.
    pub fn run_single(&self, seed: u64) -> Result<RunTrace> {
        let cfg = &self.config;
        let spec = cfg.model;
        let sites = spec.sites() as u64;
        let levels = self.ladder.len();
        let anchor = cfg.anchor_or_default();
        let energies = self.ladder.levels();

        let mut trace = RunTrace::empty(seed);
        let mut rngs: Vec<ChaCha8Rng> = (0..cfg.walkers)
            .map(|w| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(w as u64);
                rng
            })
            .collect();
        let mut lattices: Vec<SpinLattice> = rngs
            .iter_mut()
            .map(|rng| SpinLattice::random(spec, rng))
            .collect();
        let mut estimator = Estimator::new(cfg.estimator_algorithm(), levels)?;
        let mut schedule =
            ScheduleState::new(levels, cfg.eta0, cfg.check_interval_sweeps, sites, cfg.eta_min)?;

        let total = cfg.max_sweeps.saturating_mul(sites);
        let stride = cfg.trace_stride_sweeps.saturating_mul(sites);
        let mut visits = vec![0usize; cfg.walkers];
        let mut sampling = Duration::ZERO;
        let start = Instant::now();
        let mut t = 0u64;

        while t < total {
            t += 1;
            for ((lattice, rng), slot) in lattices.iter_mut().zip(&mut rngs).zip(&mut visits) {
                let outcome = metropolis_step(lattice, &mut estimator, &self.ladder, rng)?;
                *slot = outcome.visited_level;
            }
            for &n in &visits {
                schedule.record_visit(n);
            }
            let eta_before = schedule.eta();
            estimator.update_many(&visits, schedule.rate())?;
            let event = schedule.maybe_adapt(t);

            if event != AdaptEvent::None {
                let sweep = t as f64 / sites as f64;
                let mut push = |kind, eta| {
                    trace.events.push(Event {
                        kind,
                        iteration: t,
                        sweep,
                        eta,
                    })
                };
                match event {
                    AdaptEvent::None => {}
                    AdaptEvent::Halved => push(EventKind::Halved, schedule.eta()),
                    AdaptEvent::SwitchedToOneOverT { halved } => {
                        if halved {
                            push(EventKind::Halved, eta_before / 2.0);
                        }
                        push(EventKind::OneOverT, schedule.eta());
                    }
                    AdaptEvent::Stop { halved } => {
                        if halved {
                            push(EventKind::Halved, schedule.eta());
                        }
                        push(EventKind::Stop, schedule.eta());
                    }
                }
                if event.halved() && trace.first_equilibration_sweeps.is_none() {
                    trace.first_equilibration_sweeps = Some(t / sites);
                }
            }

            let stop = matches!(event, AdaptEvent::Stop { .. });
            if t.is_multiple_of(stride) || stop || t == total {
                let began = Instant::now();
                let sample = self.sample(&mut estimator, t, sites, schedule.eta(), energies, anchor)?;
                trace.samples.push(sample);
                sampling += began.elapsed();
            }
            if stop {
                break;
            }
        }
        let elapsed = start.elapsed().saturating_sub(sampling);

        trace.wall_time_seconds = elapsed.as_secs_f64();
        trace.total_iterations = t;
        trace.final_u = estimator.normalized_u();
        Ok(trace)
    }

    fn sample(
        &self,
        estimator: &mut Estimator,
        t: u64,
        sites: u64,
        eta: f64,
        energies: &[i64],
        anchor: crate::thermo::Anchor,
    ) -> Result<Sample> {
        let (epsilon, l2) = match &self.reference {
            Some(reference) => {
                let u = estimator.normalized_u();
                (
                    Some(epsilon_error(&u, reference, energies, anchor)?),
                    Some(l2_error(&u, reference)?),
                )
            }
            None => (None, None),
        };
        Ok(Sample {
            iteration: t,
            sweep: t.div_ceil(sites),
            eta,
            epsilon,
            l2,
        })
    }

    /// Runs every configured seed on a pool of `jobs` threads; results are in seed order.
    pub fn run_replicates(&self, jobs: usize) -> Result<Vec<RunTrace>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| invalid(format!("cannot start worker threads: {e}")))?;
        let results: Vec<Result<RunTrace>> =
            pool.install(|| self.config.seeds.par_iter().map(|&s| self.run_single(s)).collect());
        results
            .into_iter()
            .zip(&self.config.seeds)
            .map(|(r, &seed)| {
                r.map_err(|e| Error::Replicate {
                    seed,
                    source: Box::new(e),
                })
            })
            .collect()
    }
}

/// Prepares `config` and runs one seed.
pub fn run_single(config: &ExperimentConfig, seed: u64) -> Result<RunTrace> {
    Experiment::prepare(config.clone())?.run_single(seed)
}

/// Prepares `config` and runs all its seeds on all available cores.
pub fn run_replicates(config: &ExperimentConfig) -> Result<Vec<RunTrace>> {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    Experiment::prepare(config.clone())?.run_replicates(jobs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Halved,
    OneOverT,
    Stop,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub iteration: u64,
    pub sweep: f64,
    /// Learning rate after the event.
    pub eta: f64,
}

/// Error metrics at a trace point. The metrics are `None` without a reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub iteration: u64,
    pub sweep: u64,
    pub eta: f64,
    pub epsilon: Option<f64>,
    pub l2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub events: Vec<Event>,
    /// Sweep of the first η halving.
    pub first_equilibration_sweeps: Option<u64>,
    pub samples: Vec<Sample>,
    /// Final log-DOS estimate, zero-sum.
    pub final_u: Vec<f64>,
    pub wall_time_seconds: f64,
    pub total_iterations: u64,
}

impl RunTrace {
    pub fn empty(seed: u64) -> Self {
        RunTrace {
            seed,
            events: Vec::new(),
            first_equilibration_sweeps: None,
            samples: Vec::new(),
            final_u: Vec::new(),
            wall_time_seconds: 0.0,
            total_iterations: 0,
        }
    }

    pub fn equilibration_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind == EventKind::Halved)
    }

    pub fn epsilon_samples(&self) -> Vec<(u64, f64)> {
        self.samples
            .iter()
            .filter_map(|s| s.epsilon.map(|e| (s.sweep, e)))
            .collect()
    }

    pub fn l2_samples(&self) -> Vec<(u64, f64)> {
        self.samples
            .iter()
            .filter_map(|s| s.l2.map(|e| (s.sweep, e)))
            .collect()
    }
}

/// Streaming mean and sample standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    /// Zero for a single value.
    pub fn std(&self) -> Option<f64> {
        match self.count {
            0 => None,
            1 => Some(0.0),
            n => Some((self.m2 / (n - 1) as f64).sqrt()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonPoint {
    pub sweep: u64,
    pub epsilon: f64,
    /// Runs contributing to the mean.
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub equilibrated_runs: usize,
    pub first_equilibration: RunningStats,
    pub wall_time: RunningStats,
    pub mean_epsilon: Vec<EpsilonPoint>,
}

impl Summary {
    pub fn from_traces(traces: &[RunTrace]) -> Self {
        let mut first_equilibration = RunningStats::default();
        let mut wall_time = RunningStats::default();
        let mut by_sweep: std::collections::BTreeMap<u64, (f64, usize)> = Default::default();
        for t in traces {
            if let Some(s) = t.first_equilibration_sweeps {
                first_equilibration.push(s as f64);
            }
            wall_time.push(t.wall_time_seconds);
            for (sweep, eps) in t.epsilon_samples() {
                let slot = by_sweep.entry(sweep).or_default();
                slot.0 += eps;
                slot.1 += 1;
            }
        }
        Summary {
            runs: traces.len(),
            equilibrated_runs: first_equilibration.count() as usize,
            first_equilibration,
            wall_time,
            mean_epsilon: by_sweep
                .into_iter()
                .map(|(sweep, (sum, runs))| EpsilonPoint {
                    sweep,
                    epsilon: sum / runs as f64,
                    runs,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::runner::config::AlgorithmKind;

    fn small(algorithm: AlgorithmKind, sweeps: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(ModelSpec::ising(2).unwrap(), algorithm, 1.0, sweeps, vec![1, 2]);
        c.check_interval_sweeps = 10;
        c.trace_stride_sweeps = 5;
        c.reference_dos = Some(ReferenceSource::Exact);
        c
    }

    #[test]
    fn running_stats() {
        let mut s = RunningStats::default();
        assert_eq!(s.mean(), None);
        assert_eq!(s.std(), None);
        s.push(3.0);
        assert_eq!(s.std(), Some(0.0));
        for x in [5.0, 7.0] {
            s.push(x);
        }
        assert_eq!(s.mean(), Some(5.0));
        assert!((s.std().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_sweeps_gives_an_empty_trace() {
        let exp = Experiment::prepare(small(AlgorithmKind::Wl, 1)).unwrap();
        let mut cfg = exp.config().clone();
        cfg.max_sweeps = 0;
        let exp = Experiment { config: cfg, ..exp };
        let t = exp.run_single(3).unwrap();
        assert!(t.events.is_empty() && t.samples.is_empty());
        assert_eq!(t.total_iterations, 0);
        assert_eq!(t.final_u, vec![0.0; 3]);
    }

    #[test]
    fn runs_are_reproducible_and_seed_dependent() {
        let exp = Experiment::prepare(small(AlgorithmKind::Awl, 2000)).unwrap();
        let a = exp.run_single(11).unwrap();
        let b = exp.run_single(11).unwrap();
        let c = exp.run_single(12).unwrap();
        assert_eq!(a.final_u, b.final_u);
        assert_eq!(a.events, b.events);
        assert_ne!(a.final_u, c.final_u);
        assert_eq!(a.samples.len(), 400);
        assert!(a.first_equilibration_sweeps.is_some());
    }

    #[test]
    fn small_system_converges() {
        let exp = Experiment::prepare(small(AlgorithmKind::Wl, 20_000)).unwrap();
        let t = exp.run_single(5).unwrap();
        let eps = t.samples.last().unwrap().epsilon.unwrap();
        assert!(eps < 0.02, "epsilon {eps}");
        assert!(t.events.iter().any(|e| e.kind == EventKind::OneOverT));
    }

    #[test]
    fn replicates_come_back_in_seed_order() {
        let exp = Experiment::prepare(small(AlgorithmKind::Wl, 200)).unwrap();
        let traces = exp.run_replicates(2).unwrap();
        assert_eq!(traces.iter().map(|t| t.seed).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(traces[1], RunTrace { wall_time_seconds: traces[1].wall_time_seconds, ..exp.run_single(2).unwrap() });
        let summary = Summary::from_traces(&traces);
        assert_eq!(summary.runs, 2);
        assert_eq!(summary.mean_epsilon.len(), 40);
        assert!(summary.mean_epsilon.iter().all(|p| p.runs == 2));
    }

    #[test]
    fn reference_file_must_match_ladder() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.csv");
        std::fs::write(&path, "energy,log_g\n-8,0.1\n8,0.2\n").unwrap();
        let mut cfg = small(AlgorithmKind::Wl, 10);
        cfg.reference_dos = Some(ReferenceSource::File(path));
        let err = Experiment::prepare(cfg).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }
}
