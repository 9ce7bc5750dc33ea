//! Momentum (AWL) update with lazy per-level catch-up.
//!
//! The dense update touches every level at every iteration:
//!
//! ```text
//! m_k <- β m_k + (1 - β) 1(k = n_t)
//! u_k <- u_k + η_t √m_k
//! u   <- u - mean(u)
//! ```
//!
//! Between visits a level's momentum only decays, so the increments it receives
//! from iteration s+1 to t are `√m_k(s) Σ_j η_j (√β)^(j-s)`. Each level keeps the
//! time `s` of its last update and receives that sum when it is next read. The
//! mean subtraction is `η_t Q_t / N` with `Q_t = Σ_k √m_k(t)`, which is tracked
//! incrementally and applied through the global offset of [`DosEstimate`].

use super::dos::DosEstimate;
use super::Rate;
use crate::error::{invalid, Error, Result};

/// Iterations between full recomputations of `Q = Σ √m`.
const SQRT_SUM_REFRESH: u64 = 1_000_000;

/// Tail terms below this fraction of the accumulated sum are dropped when
/// summing an inverse-time segment term by term.
const TAIL_TOLERANCE: f64 = 1e-17;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Segment {
    start: u64,
    rate: Rate,
}

#[derive(Clone, Debug)]
pub struct MomentumState {
    m: Vec<f64>,
    last_touch: Vec<u64>,
    beta: f64,
    ln_sqrt_beta: f64,
    sqrt_sum: f64,
    now: u64,
    // Learning-rate history covering every iteration after the oldest last touch.
    history: Vec<Segment>,
}

impl MomentumState {
    /// Zero momentum on `levels` levels. `beta` must lie in `[0, 1)`; `0` reduces
    /// the update to plain Wang-Landau.
    pub fn new(levels: usize, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(invalid(format!("momentum decay must lie in [0, 1), got {beta}")));
        }
        if levels == 0 {
            return Err(invalid("momentum needs at least one level"));
        }
        Ok(MomentumState {
            m: vec![0.0; levels],
            last_touch: vec![0; levels],
            beta,
            ln_sqrt_beta: 0.5 * beta.ln(),
            sqrt_sum: 0.0,
            now: 0,
            history: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Last completed iteration.
    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn last_touch(&self, n: usize) -> u64 {
        self.last_touch[n]
    }

    /// Momentum of level `n` at the current iteration.
    pub fn momentum(&self, n: usize) -> f64 {
        self.m[n] * self.decay(self.now - self.last_touch[n])
    }

    /// Running `Q = Σ √m`.
    pub fn sqrt_sum(&self) -> f64 {
        self.sqrt_sum
    }

    fn decay(&self, span: u64) -> f64 {
        if span == 0 {
            1.0
        } else {
            self.beta.powi(span.min(i32::MAX as u64) as i32)
        }
    }

    /// `(√β)^k`.
    fn sqrt_decay(&self, k: u64) -> f64 {
        if k == 0 {
            1.0
        } else {
            (k as f64 * self.ln_sqrt_beta).exp()
        }
    }

    /// `Σ_{j=s+1}^{now} η_j (√β)^(j-s)`.
    fn discounted_rate_sum(&self, s: u64) -> f64 {
        let t = self.now;
        let first = s + 1;
        let mut i = self.history.len() - 1;
        while self.history[i].start > first {
            i -= 1;
        }
        let mut total = 0.0;
        for (k, seg) in self.history.iter().enumerate().skip(i) {
            let a = seg.start.max(first);
            let b = self
                .history
                .get(k + 1)
                .map_or(t, |next| next.start - 1)
                .min(t);
            if a > b {
                continue;
            }
            match seg.rate {
                Rate::Constant(eta) => {
                    // (√β)^(a-s) · (1 - (√β)^len) / (1 - √β)
                    let len = (b - a + 1) as f64;
                    let ratio = if self.beta == 0.0 {
                        1.0
                    } else {
                        (len * self.ln_sqrt_beta).exp_m1() / self.ln_sqrt_beta.exp_m1()
                    };
                    total += eta * self.sqrt_decay(a - s) * ratio;
                }
                Rate::InverseTime(c) => {
                    let r = self.ln_sqrt_beta.exp();
                    let mut pow = self.sqrt_decay(a - s);
                    for j in a..=b {
                        let term = c / j as f64 * pow;
                        total += term;
                        if term / (1.0 - r) <= TAIL_TOLERANCE * total {
                            break;
                        }
                        pow *= r;
                    }
                }
            }
        }
        total
    }

    /// Applies the deferred increments of level `n` up to the current iteration.
    pub fn settle(&mut self, dos: &mut DosEstimate, n: usize) {
        let s = self.last_touch[n];
        if s == self.now {
            return;
        }
        if self.m[n] > 0.0 {
            let inc = self.m[n].sqrt() * self.discounted_rate_sum(s);
            dos.add(n, inc);
            self.m[n] *= self.decay(self.now - s);
        }
        self.last_touch[n] = self.now;
    }

    /// Settles every level, recomputes `Q` and folds the offset into `dos`.
    pub fn settle_all(&mut self, dos: &mut DosEstimate) {
        for n in 0..self.m.len() {
            self.settle(dos, n);
        }
        self.sqrt_sum = self.m.iter().map(|m| m.sqrt()).sum();
        if let Some(last) = self.history.last().copied() {
            self.history.clear();
            self.history.push(last);
        }
        dos.rebase();
    }

    /// Recomputes `Q` from the decayed momenta without settling.
    pub fn refresh_sqrt_sum(&mut self) {
        self.sqrt_sum = (0..self.m.len())
            .map(|n| self.m[n].sqrt() * self.sqrt_decay(self.now - self.last_touch[n]))
            .sum();
    }

    /// One AWL iteration `t` with the indicator of level `n`.
    pub fn step(&mut self, dos: &mut DosEstimate, n: usize, rate: Rate, t: u64) -> Result<()> {
        self.step_many(dos, std::slice::from_ref(&n), rate, t)
    }

    /// One AWL iteration `t` fed with the averaged indicator of `visits`.
    pub fn step_many(
        &mut self,
        dos: &mut DosEstimate,
        visits: &[usize],
        rate: Rate,
        t: u64,
    ) -> Result<()> {
        if t != self.now + 1 {
            return Err(Error::Ordering(format!(
                "iteration {t} does not follow iteration {}",
                self.now
            )));
        }
        if dos.len() != self.m.len() {
            return Err(invalid("estimate and momentum have different lengths"));
        }
        if visits.is_empty() {
            return Err(invalid("an update needs at least one visited level"));
        }
        if let Some(&n) = visits.iter().find(|&&n| n >= self.m.len()) {
            return Err(invalid(format!("level {n} outside 0..{}", self.m.len())));
        }
        let eta = rate.at(t);
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(invalid(format!("learning rate must be positive, got {eta}")));
        }

        for &n in visits {
            self.settle(dos, n);
        }

        self.now = t;
        if self.history.last().is_none_or(|seg| seg.rate != rate) {
            self.history.push(Segment { start: t, rate });
        }
        let sqrt_beta = self.sqrt_decay(1);
        self.sqrt_sum *= sqrt_beta;

        let weight = 1.0 / visits.len() as f64;
        for (i, &n) in visits.iter().enumerate() {
            if visits[..i].contains(&n) {
                continue;
            }
            let count = visits[i..].iter().filter(|&&k| k == n).count() as f64;
            let old = self.m[n];
            let new = self.beta * old + (1.0 - self.beta) * weight * count;
            self.sqrt_sum += new.sqrt() - sqrt_beta * old.sqrt();
            self.m[n] = new;
            self.last_touch[n] = t;
            dos.add(n, eta * new.sqrt());
        }

        if t.is_multiple_of(SQRT_SUM_REFRESH) {
            self.refresh_sqrt_sum();
        }
        dos.shift_down(eta * self.sqrt_sum / dos.len() as f64);
        Ok(())
    }
}

/// One AWL iteration with a constant learning rate `eta`.
pub fn awl_step(
    dos: &mut DosEstimate,
    momentum: &mut MomentumState,
    n: usize,
    eta: f64,
    t: u64,
) -> Result<()> {
    momentum.step(dos, n, Rate::Constant(eta), t)
}
