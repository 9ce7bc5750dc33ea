//! Log-DOS estimation: the WL and AWL updates, zero-sum normalisation and the
//! learning-rate schedule.

mod dos;
mod momentum;
mod objective;
mod schedule;

pub use dos::{wl_step, wl_step_many, DosEstimate};
pub use momentum::{awl_step, MomentumState};
pub use objective::{gradient, objective};
pub use schedule::{AdaptEvent, Phase, ScheduleState};

use crate::error::{Error, Result};
use crate::sampler::LogDensity;

/// Learning rate as a function of the iteration index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    Constant(f64),
    /// `c / t`.
    InverseTime(f64),
}

impl Rate {
    #[inline]
    pub fn at(self, t: u64) -> f64 {
        match self {
            Rate::Constant(eta) => eta,
            Rate::InverseTime(c) => c / t as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algorithm {
    /// Plain Wang-Landau.
    Wl,
    /// Momentum-accelerated Wang-Landau with decay `beta`.
    Awl { beta: f64 },
}

/// A log-DOS estimate together with its update rule and iteration counter.
#[derive(Clone, Debug)]
pub struct Estimator {
    dos: DosEstimate,
    momentum: Option<MomentumState>,
    iteration: u64,
}

impl Estimator {
    pub fn new(algorithm: Algorithm, levels: usize) -> Result<Self> {
        let momentum = match algorithm {
            Algorithm::Wl => None,
            Algorithm::Awl { beta } => Some(MomentumState::new(levels, beta)?),
        };
        Ok(Estimator {
            dos: DosEstimate::zeros(levels),
            momentum,
            iteration: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.dos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dos.is_empty()
    }

    /// Completed iterations.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// The underlying estimate. Entries of an AWL estimate may lag until settled.
    pub fn dos(&self) -> &DosEstimate {
        &self.dos
    }

    pub fn momentum(&self) -> Option<&MomentumState> {
        self.momentum.as_ref()
    }

    /// One iteration with the indicator of `level`.
    #[inline]
    pub fn update(&mut self, level: usize, rate: Rate) -> Result<()> {
        self.update_many(std::slice::from_ref(&level), rate)
    }

    /// One iteration with the averaged indicator of several walkers' levels.
    pub fn update_many(&mut self, levels: &[usize], rate: Rate) -> Result<()> {
        let t = self.iteration + 1;
        match &mut self.momentum {
            None => wl_step_many(&mut self.dos, levels, rate.at(t))?,
            Some(m) => m.step_many(&mut self.dos, levels, rate, t)?,
        }
        self.iteration = t;
        Ok(())
    }

    /// Brings every level up to date and folds the normalisation offset in.
    pub fn settle_all(&mut self) {
        match &mut self.momentum {
            None => self.dos.rebase(),
            Some(m) => m.settle_all(&mut self.dos),
        }
    }

    /// Current effective `u`, summing to zero.
    pub fn normalized_u(&mut self) -> Vec<f64> {
        self.settle_all();
        self.dos.normalized_u()
    }

    /// Current value of level `n`, settling it first.
    pub fn value(&mut self, n: usize) -> Result<f64> {
        if n >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "level {n} outside 0..{}",
                self.len()
            )));
        }
        Ok(self.log_g(n))
    }
}

impl LogDensity for Estimator {
    #[inline]
    fn log_g(&mut self, level: usize) -> f64 {
        if let Some(m) = &mut self.momentum {
            m.settle(&mut self.dos, level);
        }
        self.dos.value(level)
    }
}
