//! Periodic L×L Ising and q-state Potts models.
//!
//! Spins are stored as integers in `0..q`. For the Ising model `0` encodes `+1`
//! and `1` encodes `-1`. Couplings are uniform (J = 1) and there is no external
//! field. Every site owns the bond to its right and the bond below it, so the
//! bond multiset always has 2L² members; at L = 2 this makes each neighbouring
//! pair doubly bonded.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::oracle;
use crate::sampler;

/// Largest state space (q^(L²)) that [`discover_ladder`] enumerates exhaustively.
pub const ENUMERATION_LIMIT: u128 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Ising,
    Potts,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ising => "ising",
            ModelKind::Potts => "potts",
        }
    }
}

/// Model choice plus lattice side and number of spin states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    kind: ModelKind,
    side: usize,
    q: u32,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, side: usize, q: u32) -> Result<Self> {
        if side < 2 || !side.is_multiple_of(2) {
            return Err(invalid(format!(
                "lattice side L must be even and at least 2, got {side}"
            )));
        }
        match kind {
            ModelKind::Ising if q != 2 => {
                return Err(invalid(format!("the Ising model has q = 2, got {q}")))
            }
            ModelKind::Potts if !(3..=256).contains(&q) => {
                return Err(invalid(format!(
                    "the Potts model needs 3 <= q <= 256, got {q}"
                )))
            }
            _ => {}
        }
        Ok(ModelSpec { kind, side, q })
    }

    pub fn ising(side: usize) -> Result<Self> {
        Self::new(ModelKind::Ising, side, 2)
    }

    pub fn potts(side: usize, q: u32) -> Result<Self> {
        Self::new(ModelKind::Potts, side, q)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Lattice side L.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of sites, L². Also the number of iterations in one MC sweep.
    pub fn sites(&self) -> usize {
        self.side * self.side
    }

    /// Number of bonds, 2L².
    pub fn bonds(&self) -> i64 {
        2 * self.sites() as i64
    }

    /// q^(L²), or `None` if it does not fit in a `u128`.
    pub fn state_count(&self) -> Option<u128> {
        let exp = u32::try_from(self.sites()).ok()?;
        (self.q as u128).checked_pow(exp)
    }

    /// Inclusive bounds that every energy of this model lies within.
    pub fn energy_bounds(&self) -> (i64, i64) {
        match self.kind {
            ModelKind::Ising => (-self.bonds(), self.bonds()),
            ModelKind::Potts => (-self.bonds(), 0),
        }
    }

    /// Energy change per bond when a bond goes from unsatisfied to satisfied.
    fn bond_gain(&self) -> i64 {
        match self.kind {
            ModelKind::Ising => 2,
            ModelKind::Potts => 1,
        }
    }

    /// Energy of a bond whose endpoints are not equal.
    fn unequal_bond_energy(&self) -> i64 {
        match self.kind {
            ModelKind::Ising => 1,
            ModelKind::Potts => 0,
        }
    }
}

/// Spin configuration with a cached total energy.
#[derive(Clone, Debug)]
pub struct SpinLattice {
    spec: ModelSpec,
    sites: Vec<u8>,
    // right, left, down, up
    neighbors: Vec<[u32; 4]>,
    energy: i64,
}

impl SpinLattice {
    /// All sites set to `value`.
    pub fn uniform(spec: ModelSpec, value: u8) -> Result<Self> {
        Self::from_sites(spec, vec![value; spec.sites()])
    }

    pub fn random<R: Rng + ?Sized>(spec: ModelSpec, rng: &mut R) -> Self {
        let sites = (0..spec.sites())
            .map(|_| rng.random_range(0..spec.q) as u8)
            .collect();
        Self::build(spec, sites)
    }

    pub fn from_sites(spec: ModelSpec, sites: Vec<u8>) -> Result<Self> {
        if sites.len() != spec.sites() {
            return Err(invalid(format!(
                "expected {} sites, got {}",
                spec.sites(),
                sites.len()
            )));
        }
        if let Some(pos) = sites.iter().position(|&v| v as u32 >= spec.q) {
            return Err(invalid(format!(
                "site {pos} has value {} outside 0..{}",
                sites[pos], spec.q
            )));
        }
        Ok(Self::build(spec, sites))
    }

    fn build(spec: ModelSpec, sites: Vec<u8>) -> Self {
        let l = spec.side;
        let neighbors = (0..spec.sites())
            .map(|i| {
                let (r, c) = (i / l, i % l);
                [
                    (r * l + (c + 1) % l) as u32,
                    (r * l + (c + l - 1) % l) as u32,
                    (((r + 1) % l) * l + c) as u32,
                    (((r + l - 1) % l) * l + c) as u32,
                ]
            })
            .collect();
        let mut lattice = SpinLattice {
            spec,
            sites,
            neighbors,
            energy: 0,
        };
        lattice.energy = lattice.total_energy();
        lattice
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn sites(&self) -> &[u8] {
        &self.sites
    }

    pub fn value(&self, site: usize) -> u8 {
        self.sites[site]
    }

    /// The cached total energy.
    pub fn energy(&self) -> i64 {
        self.energy
    }

    /// Total energy recomputed from scratch over the 2L² bonds.
    pub fn total_energy(&self) -> i64 {
        let unequal = self.spec.unequal_bond_energy();
        let gain = self.spec.bond_gain();
        let mut e = 0;
        for (i, nb) in self.neighbors.iter().enumerate() {
            let v = self.sites[i];
            for j in [nb[0], nb[2]] {
                e += unequal - gain * (v == self.sites[j as usize]) as i64;
            }
        }
        e
    }

    /// Energy change from setting `site` to `value`.
    pub fn delta_energy(&self, site: usize, value: u8) -> Result<i64> {
        if site >= self.sites.len() {
            return Err(invalid(format!(
                "site {site} outside 0..{}",
                self.sites.len()
            )));
        }
        if value as u32 >= self.spec.q {
            return Err(invalid(format!(
                "value {value} outside 0..{}",
                self.spec.q
            )));
        }
        Ok(self.delta_energy_unchecked(site, value))
    }

    /// Energy change from setting `site` to `value`; inspects only the four neighbours.
    #[inline]
    pub(crate) fn delta_energy_unchecked(&self, site: usize, value: u8) -> i64 {
        let old = self.sites[site];
        if old == value {
            return 0;
        }
        let mut satisfied = 0i64;
        for &j in &self.neighbors[site] {
            let x = self.sites[j as usize];
            satisfied += (x == value) as i64 - (x == old) as i64;
        }
        -self.spec.bond_gain() * satisfied
    }

    /// Sets `site` to `value`, keeping the cached energy current.
    pub fn set(&mut self, site: usize, value: u8) -> Result<()> {
        let delta = self.delta_energy(site, value)?;
        self.apply(site, value, delta);
        Ok(())
    }

    #[inline]
    pub(crate) fn apply(&mut self, site: usize, value: u8, delta: i64) {
        self.sites[site] = value;
        self.energy += delta;
    }
}

/// Sorted admissible energy levels with an energy → index lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyLadder {
    levels: Vec<i64>,
    lookup: Vec<u32>,
}

const NOT_A_LEVEL: u32 = u32::MAX;

impl EnergyLadder {
    /// Builds a ladder from strictly increasing energies (at least two).
    pub fn new(levels: Vec<i64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(invalid(format!(
                "an energy ladder needs at least 2 levels, got {}",
                levels.len()
            )));
        }
        if let Some(w) = levels.windows(2).find(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "energy levels must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let min = levels[0];
        let span = usize::try_from(levels[levels.len() - 1] - min)
            .map_err(|_| invalid("energy range too large"))?;
        if span > (1 << 28) {
            return Err(invalid(format!("energy range {span} too large for a ladder")));
        }
        let mut lookup = vec![NOT_A_LEVEL; span + 1];
        for (n, &e) in levels.iter().enumerate() {
            lookup[(e - min) as usize] = n as u32;
        }
        Ok(EnergyLadder { levels, lookup })
    }

    /// Sorts and deduplicates before building.
    pub fn from_energies(energies: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut levels: Vec<i64> = energies.into_iter().collect();
        levels.sort_unstable();
        levels.dedup();
        Self::new(levels)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[i64] {
        &self.levels
    }

    pub fn energy(&self, n: usize) -> i64 {
        self.levels[n]
    }

    pub fn min(&self) -> i64 {
        self.levels[0]
    }

    pub fn max(&self) -> i64 {
        self.levels[self.levels.len() - 1]
    }

    #[inline]
    pub fn index_of(&self, energy: i64) -> Option<usize> {
        let off = energy.checked_sub(self.levels[0])?;
        if off < 0 {
            return None;
        }
        match self.lookup.get(off as usize) {
            Some(&n) if n != NOT_A_LEVEL => Some(n as usize),
            _ => None,
        }
    }

    /// Energies as floats, for thermodynamic averages.
    pub fn energies_f64(&self) -> Vec<f64> {
        self.levels.iter().map(|&e| e as f64).collect()
    }
}

/// Admissible Ising energies on the periodic even-L lattice: −2L² + 4k for
/// k = 0..=L², without the unreachable single-defect levels ±(2L² − 4).
pub fn ising_ladder(side: usize) -> Result<EnergyLadder> {
    let spec = ModelSpec::ising(side)?;
    let b = spec.bonds();
    let levels = (0..=spec.sites() as i64)
        .map(|k| -b + 4 * k)
        .filter(|&e| e != -b + 4 && e != b - 4)
        .collect();
    EnergyLadder::new(levels)
}

/// How a ladder returned by [`discover_ladder`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderSource {
    /// Exhaustive enumeration; the ladder is exact.
    Enumerated,
    /// Exploratory sampling; levels that were never visited are missing.
    Explored,
}

/// Finds the distinct energies of a model: by exhaustive enumeration when
/// q^(L²) ≤ [`ENUMERATION_LIMIT`], otherwise by a fixed-η Wang-Landau exploration
/// of `sampler_budget` sweeps that admits new energies as they appear.
pub fn discover_ladder<R: Rng + ?Sized>(
    spec: ModelSpec,
    sampler_budget: u64,
    rng: &mut R,
) -> Result<(EnergyLadder, LadderSource)> {
    if sampler_budget == 0 {
        return Err(invalid("ladder discovery budget must be at least one sweep"));
    }
    if spec.state_count().is_some_and(|c| c <= ENUMERATION_LIMIT) {
        let exact = oracle::enumerate_dos(spec, ENUMERATION_LIMIT)?;
        return Ok((exact.ladder, LadderSource::Enumerated));
    }

    let mut lattice = SpinLattice::random(spec, rng);
    let mut log_g: HashMap<i64, f64> = HashMap::new();
    log_g.insert(lattice.energy(), 0.0);
    let eta = 1.0;
    let iterations = sampler_budget.saturating_mul(spec.sites() as u64);
    for _ in 0..iterations {
        let proposal = sampler::propose(&lattice, rng);
        let delta = lattice.delta_energy_unchecked(proposal.site, proposal.value);
        let old = lattice.energy();
        let new = old + delta;
        let accept = match log_g.get(&new) {
            None => true,
            Some(&w_new) => {
                let diff = log_g[&old] - w_new;
                diff >= 0.0 || rng.random::<f64>().ln() < diff
            }
        };
        if accept {
            lattice.apply(proposal.site, proposal.value, delta);
        }
        let floor = if log_g.contains_key(&lattice.energy()) {
            0.0
        } else {
            log_g.values().copied().fold(f64::INFINITY, f64::min)
        };
        *log_g.entry(lattice.energy()).or_insert(floor) += eta;
    }
    let ladder = EnergyLadder::from_energies(log_g.into_keys())?;
    Ok((ladder, LadderSource::Explored))
}
