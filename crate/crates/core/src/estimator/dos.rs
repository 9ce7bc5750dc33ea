use crate::error::{invalid, Result};
use crate::numeric::center;

/// Log-scale density-of-states estimate `u`, stored as `raw - offset`.
///
/// The normalisation to zero sum is carried by a single global offset so that
/// a WL update touches one entry instead of all N.
#[derive(Clone, Debug, PartialEq)]
pub struct DosEstimate {
    raw: Vec<f64>,
    offset: f64,
    raw_sum: f64,
}

impl DosEstimate {
    pub fn zeros(levels: usize) -> Self {
        DosEstimate {
            raw: vec![0.0; levels],
            offset: 0.0,
            raw_sum: 0.0,
        }
    }

    /// Estimate with the given effective values, re-centred to zero sum.
    pub fn from_values(values: &[f64]) -> Self {
        let mut raw = values.to_vec();
        center(&mut raw);
        let raw_sum = raw.iter().sum();
        DosEstimate {
            raw,
            offset: 0.0,
            raw_sum,
        }
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Effective value `u_n`.
    #[inline]
    pub fn value(&self, n: usize) -> f64 {
        self.raw[n] - self.offset
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Running Σ raw, refreshed by [`DosEstimate::rebase`].
    pub fn raw_sum(&self) -> f64 {
        self.raw_sum
    }

    #[inline]
    pub(crate) fn add(&mut self, n: usize, delta: f64) {
        self.raw[n] += delta;
        self.raw_sum += delta;
    }

    /// Lowers every effective value by `delta`.
    #[inline]
    pub(crate) fn shift_down(&mut self, delta: f64) {
        self.offset += delta;
    }

    /// Folds the offset into the stored values and recomputes the running sum.
    pub fn rebase(&mut self) {
        let offset = self.offset;
        for r in &mut self.raw {
            *r -= offset;
        }
        self.offset = 0.0;
        self.raw_sum = self.raw.iter().sum();
    }

    /// Effective values re-centred to an exact zero sum.
    pub fn normalized_u(&self) -> Vec<f64> {
        let mut u: Vec<f64> = (0..self.len()).map(|n| self.value(n)).collect();
        center(&mut u);
        u
    }
}

/// Wang-Landau update: raise `u_n` by `eta`, then restore the zero sum.
pub fn wl_step(dos: &mut DosEstimate, n: usize, eta: f64) -> Result<()> {
    wl_step_many(dos, std::slice::from_ref(&n), eta)
}

/// Multi-walker Wang-Landau update with the averaged indicator of `visits`.
pub fn wl_step_many(dos: &mut DosEstimate, visits: &[usize], eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid(format!("learning rate must be positive, got {eta}")));
    }
    if visits.is_empty() {
        return Err(invalid("an update needs at least one visited level"));
    }
    if let Some(&n) = visits.iter().find(|&&n| n >= dos.len()) {
        return Err(invalid(format!("level {n} outside 0..{}", dos.len())));
    }
    let weight = eta / visits.len() as f64;
    for &n in visits {
        dos.add(n, weight);
    }
    dos.shift_down(eta / dos.len() as f64);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_update_on_three_levels() {
        let mut dos = DosEstimate::zeros(3);
        wl_step(&mut dos, 1, 0.5).unwrap();
        let u = dos.normalized_u();
        let expected = [-1.0 / 6.0, 1.0 / 3.0, -1.0 / 6.0];
        for (a, b) in u.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        for n in 0..3 {
            assert!((dos.value(n) - expected[n]).abs() < 1e-15);
        }
    }

    #[test]
    fn repeated_visits_accumulate() {
        let n_levels = 7;
        let mut dos = DosEstimate::zeros(n_levels);
        wl_step(&mut dos, 4, 1.0).unwrap();
        wl_step(&mut dos, 4, 1.0).unwrap();
        let want = 2.0 * (1.0 - 1.0 / n_levels as f64);
        assert!((dos.value(4) - want).abs() < 1e-14);
        assert!(dos.normalized_u().iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn sum_stays_zero() {
        let mut dos = DosEstimate::zeros(15);
        for i in 0..1000 {
            wl_step(&mut dos, (i * 7) % 15, 0.3).unwrap();
            let s: f64 = (0..15).map(|n| dos.value(n)).sum();
            assert!(s.abs() < 1e-9 * 15.0);
        }
        dos.rebase();
        assert_eq!(dos.offset(), 0.0);
        assert!(dos.raw_sum().abs() < 1e-9);
    }

    #[test]
    fn raw_sum_tracks_raw() {
        let mut dos = DosEstimate::zeros(5);
        for i in 0..100 {
            wl_step(&mut dos, i % 5, 0.01 * (i + 1) as f64).unwrap();
        }
        let direct: f64 = dos.raw().iter().sum();
        assert!((direct - dos.raw_sum()).abs() <= 1e-6 * direct.abs());
    }

    #[test]
    fn rejects_bad_learning_rates_and_levels() {
        let mut dos = DosEstimate::zeros(3);
        assert!(wl_step(&mut dos, 0, 0.0).is_err());
        assert!(wl_step(&mut dos, 0, -1.0).is_err());
        assert!(wl_step(&mut dos, 0, f64::NAN).is_err());
        assert!(wl_step(&mut dos, 3, 1.0).is_err());
        assert!(wl_step_many(&mut dos, &[], 1.0).is_err());
    }

    #[test]
    fn multi_walker_update_averages_indicators() {
        let mut dos = DosEstimate::zeros(4);
        wl_step_many(&mut dos, &[0, 0, 2, 3], 1.0).unwrap();
        let u = dos.normalized_u();
        let want = [0.5 - 0.25, -0.25, 0.25 - 0.25, 0.25 - 0.25];
        for (a, b) in u.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn from_values_centres() {
        let dos = DosEstimate::from_values(&[1.0, 2.0, 3.0]);
        assert_eq!(dos.normalized_u(), vec![-1.0, 0.0, 1.0]);
    }
}
