use super::Rate;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// η is halved each time every level has been visited since the last change.
    FlatHistogram,
    /// η = N/t at every iteration.
    OneOverT,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdaptEvent {
    None,
    /// Flat histogram reached: η was halved and the histogram reset.
    Halved,
    /// Entered the 1/t phase; `halved` is set when a halving triggered the switch.
    SwitchedToOneOverT { halved: bool },
    /// η fell below the stopping threshold.
    Stop { halved: bool },
}

impl AdaptEvent {
    /// Whether the event marks a flat histogram (an equilibration).
    pub fn halved(self) -> bool {
        matches!(
            self,
            AdaptEvent::Halved
                | AdaptEvent::SwitchedToOneOverT { halved: true }
                | AdaptEvent::Stop { halved: true }
        )
    }
}

/// Learning-rate schedule: minimum-histogram halving followed by the 1/t rule.
#[derive(Clone, Debug)]
pub struct ScheduleState {
    eta: f64,
    histogram: Vec<u64>,
    phase: Phase,
    iteration: u64,
    check_interval: u64,
    eta_min: f64,
}

impl ScheduleState {
    /// `check_interval_sweeps · iterations_per_sweep` iterations separate two
    /// flat-histogram checks.
    pub fn new(
        levels: usize,
        eta0: f64,
        check_interval_sweeps: u64,
        iterations_per_sweep: u64,
        eta_min: f64,
    ) -> Result<Self> {
        if levels == 0 {
            return Err(invalid("schedule needs at least one level"));
        }
        if !(eta0 > 0.0 && eta0.is_finite()) {
            return Err(invalid(format!("eta0 must be positive, got {eta0}")));
        }
        if !(eta_min >= 0.0) {
            return Err(invalid(format!("eta_min must be nonnegative, got {eta_min}")));
        }
        let check_interval = check_interval_sweeps
            .checked_mul(iterations_per_sweep)
            .filter(|&c| c > 0)
            .ok_or_else(|| invalid("check interval must be a positive number of iterations"))?;
        Ok(ScheduleState {
            eta: eta0,
            histogram: vec![0; levels],
            phase: Phase::FlatHistogram,
            iteration: 0,
            check_interval,
            eta_min,
        })
    }

    /// Current learning rate. In the 1/t phase this is N/t for the last iteration t.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Learning rate to use for the next iteration.
    pub fn rate(&self) -> Rate {
        match self.phase {
            Phase::FlatHistogram => Rate::Constant(self.eta),
            Phase::OneOverT => Rate::InverseTime(self.levels() as f64),
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn histogram(&self) -> &[u64] {
        &self.histogram
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Iterations between flat-histogram checks.
    pub fn check_interval(&self) -> u64 {
        self.check_interval
    }

    pub fn levels(&self) -> usize {
        self.histogram.len()
    }

    #[inline]
    pub fn record_visit(&mut self, n: usize) {
        if self.phase == Phase::FlatHistogram {
            self.histogram[n] += 1;
        }
    }

    /// Applies the schedule at the end of iteration `t`.
    ///
    /// The flat check and the switch test `η ≤ N/t` run only at multiples of the
    /// check interval; in the 1/t phase η tracks N/t every iteration.
    pub fn maybe_adapt(&mut self, t: u64) -> AdaptEvent {
        self.iteration = t;
        let n = self.levels() as f64;
        let event = match self.phase {
            Phase::FlatHistogram if t > 0 && t.is_multiple_of(self.check_interval) => {
                let halved = self.histogram.iter().all(|&h| h > 0);
                if halved {
                    self.eta /= 2.0;
                    self.histogram.fill(0);
                }
                if self.eta <= n / t as f64 {
                    self.phase = Phase::OneOverT;
                    self.eta = n / t as f64;
                    self.histogram.fill(0);
                    AdaptEvent::SwitchedToOneOverT { halved }
                } else if halved {
                    AdaptEvent::Halved
                } else {
                    AdaptEvent::None
                }
            }
            Phase::FlatHistogram => AdaptEvent::None,
            Phase::OneOverT => {
                self.eta = n / t as f64;
                AdaptEvent::None
            }
        };
        if self.eta < self.eta_min {
            return AdaptEvent::Stop {
                halved: event.halved(),
            };
        }
        event
    }
}
