//! Metropolis kernel whose stationary law puts mass ∝ g(E_n)·exp(−u_n) on level n.
//!
//! One call to [`metropolis_step`] is one iteration: a single-site proposal and an
//! accept/reject decision. A sweep is L² iterations.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{EnergyLadder, ModelKind, SpinLattice};

/// Read access to the current log-DOS estimate at a level.
///
/// Takes `&mut self` so lazy estimators can bring the level up to date first.
pub trait LogDensity {
    fn log_g(&mut self, level: usize) -> f64;
}

impl LogDensity for [f64] {
    fn log_g(&mut self, level: usize) -> f64 {
        self[level]
    }
}

impl LogDensity for Vec<f64> {
    fn log_g(&mut self, level: usize) -> f64 {
        self[level]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Proposal {
    pub site: usize,
    pub value: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    /// Level of the configuration after the step.
    pub visited_level: usize,
    pub accepted: bool,
    pub proposed_level: usize,
}

/// Picks a site uniformly. Ising flips it; Potts draws a new value uniformly
/// from all q states, the current one included.
#[inline]
pub fn propose<R: Rng + ?Sized>(lattice: &SpinLattice, rng: &mut R) -> Proposal {
    let spec = lattice.spec();
    let site = rng.random_range(0..spec.sites());
    let value = match spec.kind() {
        ModelKind::Ising => lattice.value(site) ^ 1,
        ModelKind::Potts => rng.random_range(0..spec.q()) as u8,
    };
    Proposal { site, value }
}

/// Probability of accepting a move between levels with log-DOS `u_old` and `u_new`.
pub fn acceptance_probability(u_old: f64, u_new: f64) -> f64 {
    (u_old - u_new).exp().min(1.0)
}

/// One Metropolis iteration against the log-DOS `weights`.
///
/// Fails with [`Error::OffLadder`] if the current or proposed energy is not a level.
#[inline]
pub fn metropolis_step<R, W>(
    lattice: &mut SpinLattice,
    weights: &mut W,
    ladder: &EnergyLadder,
    rng: &mut R,
) -> Result<StepOutcome>
where
    R: Rng + ?Sized,
    W: LogDensity + ?Sized,
{
    let old_energy = lattice.energy();
    let old_level = ladder
        .index_of(old_energy)
        .ok_or(Error::OffLadder { energy: old_energy })?;
    let proposal = propose(lattice, rng);
    let delta = lattice.delta_energy_unchecked(proposal.site, proposal.value);
    let new_energy = old_energy + delta;
    let new_level = ladder
        .index_of(new_energy)
        .ok_or(Error::OffLadder { energy: new_energy })?;

    let accepted = if new_level == old_level {
        true
    } else {
        let diff = weights.log_g(old_level) - weights.log_g(new_level);
        diff >= 0.0 || rng.random::<f64>().ln() < diff
    };
    if accepted {
        lattice.apply(proposal.site, proposal.value, delta);
    }
    Ok(StepOutcome {
        visited_level: if accepted { new_level } else { old_level },
        accepted,
        proposed_level: new_level,
    })
}
