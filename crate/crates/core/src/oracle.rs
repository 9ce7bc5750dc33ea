//! Exact references for small systems.

use crate::error::{invalid, Error, Result};
use crate::model::{EnergyLadder, ModelSpec, SpinLattice};
use crate::numeric::{center, softmax};

/// Exact density of states from exhaustive enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDos {
    pub ladder: EnergyLadder,
    /// Number of configurations at each level.
    pub counts: Vec<u64>,
    /// `log(counts / Σ counts)`, so that Σ exp(log_g) = 1.
    pub log_g: Vec<f64>,
}

impl ExactDos {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Log-DOS shifted to zero mean (the minimiser of the objective).
    pub fn centered(&self) -> Vec<f64> {
        let mut u = self.log_g.clone();
        center(&mut u);
        u
    }
}

/// Reflected q-ary Gray code over `digits` positions: each step changes one digit by ±1.
struct GrayCode {
    digits: Vec<u8>,
    direction: Vec<i8>,
    radix: u8,
}

impl GrayCode {
    fn new(len: usize, radix: u8) -> Self {
        GrayCode {
            digits: vec![0; len],
            direction: vec![1; len],
            radix,
        }
    }

    /// Advances to the next word, returning the changed position and its new digit,
    /// or `None` after the last word.
    fn advance(&mut self) -> Option<(usize, u8)> {
        for j in 0..self.digits.len() {
            let next = self.digits[j] as i16 + self.direction[j] as i16;
            if (0..self.radix as i16).contains(&next) {
                self.digits[j] = next as u8;
                return Some((j, next as u8));
            }
            self.direction[j] = -self.direction[j];
        }
        None
    }
}

/// Counts configurations per energy by walking all q^(L²) states in Gray-code
/// order, updating the energy with single-site deltas.
pub fn enumerate_dos(spec: ModelSpec, budget: u128) -> Result<ExactDos> {
    let states = spec.state_count().unwrap_or(u128::MAX);
    if states > budget {
        return Err(Error::Capacity {
            states,
            limit: budget,
        });
    }
    let (lo, hi) = spec.energy_bounds();
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    let mut lattice = SpinLattice::uniform(spec, 0)?;
    let mut gray = GrayCode::new(spec.sites(), spec.q() as u8);
    counts[(lattice.energy() - lo) as usize] += 1;
    while let Some((site, value)) = gray.advance() {
        let delta = lattice.delta_energy_unchecked(site, value);
        lattice.apply(site, value, delta);
        counts[(lattice.energy() - lo) as usize] += 1;
    }

    let (levels, counts): (Vec<i64>, Vec<u64>) = counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (lo + i as i64, c))
        .unzip();
    let total = counts.iter().sum::<u64>() as f64;
    let log_g = counts.iter().map(|&c| (c as f64 / total).ln()).collect();
    Ok(ExactDos {
        ladder: EnergyLadder::new(levels)?,
        counts,
        log_g,
    })
}

/// Probability the flat-histogram target with log-DOS estimate `u` assigns to each
/// level: softmax of `log_g − u`.
pub fn level_law(exact: &ExactDos, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != exact.log_g.len() {
        return Err(invalid(format!(
            "u has {} entries, the exact DOS has {}",
            u.len(),
            exact.log_g.len()
        )));
    }
    let logits: Vec<f64> = exact.log_g.iter().zip(u).map(|(g, x)| g - x).collect();
    Ok(softmax(&logits))
}

/// The AWL update applied literally to every level at every iteration, with the
/// mean subtracted after each one. O(N) per step; for testing the lazy estimator.
pub fn dense_awl_reference(
    visits: &[usize],
    etas: &[f64],
    beta: f64,
    levels: usize,
) -> Result<Vec<f64>> {
    if visits.len() != etas.len() {
        return Err(invalid(format!(
            "{} visits but {} learning rates",
            visits.len(),
            etas.len()
        )));
    }
    if let Some(&n) = visits.iter().find(|&&n| n >= levels) {
        return Err(invalid(format!("level {n} outside 0..{levels}")));
    }
    let mut u = vec![0.0; levels];
    let mut m = vec![0.0; levels];
    for (&visited, &eta) in visits.iter().zip(etas) {
        for (k, (uk, mk)) in u.iter_mut().zip(m.iter_mut()).enumerate() {
            let indicator = if k == visited { 1.0 } else { 0.0 };
            *mk = beta * *mk + (1.0 - beta) * indicator;
            *uk += eta * mk.sqrt();
        }
        center(&mut u);
    }
    Ok(u)
}
