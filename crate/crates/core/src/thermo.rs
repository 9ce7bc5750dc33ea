//! Thermodynamic observables from a log-DOS and error metrics against a reference.
//!
//! All averages use weights `softmax(log_g_n − E_n / T)`, so they are invariant to
//! an additive constant in `log_g` and stay finite at low temperature.

use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::numeric::{center, log_sum_exp, softmax};

/// Evenly spaced temperatures `start, start + step, …, stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TemperatureGrid {
    start: f64,
    stop: f64,
    step: f64,
}

impl Default for TemperatureGrid {
    fn default() -> Self {
        TemperatureGrid {
            start: 0.4,
            stop: 8.0,
            step: 0.1,
        }
    }
}

impl TemperatureGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start > 0.0 && start.is_finite()) {
            return Err(invalid(format!("temperature grid start must be positive, got {start}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid(format!("temperature grid step must be positive, got {step}")));
        }
        if !(stop >= start && stop.is_finite()) {
            return Err(invalid(format!(
                "temperature grid stop {stop} is below start {start}"
            )));
        }
        Ok(TemperatureGrid { start, stop, step })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid points computed as `start + i·step`, rounded to 12 decimals so that
    /// values like 0.4 + 3·0.1 print as 0.7.
    pub fn temperatures(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let t = self.start + i as f64 * self.step;
                (t * 1e12).round() / 1e12
            })
            .collect()
    }
}

fn boltzmann_weights(log_g: &[f64], energies: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return Err(invalid(format!("temperature must be positive, got {temperature}")));
    }
    if log_g.len() != energies.len() {
        return Err(invalid(format!(
            "{} log-DOS entries but {} energies",
            log_g.len(),
            energies.len()
        )));
    }
    let logits: Vec<f64> = log_g
        .iter()
        .zip(energies)
        .map(|(g, e)| g - e / temperature)
        .collect();
    Ok(softmax(&logits))
}

/// ⟨E⟩ at temperature `temperature`.
pub fn internal_energy(log_g: &[f64], energies: &[f64], temperature: f64) -> Result<f64> {
    let w = boltzmann_weights(log_g, energies, temperature)?;
    Ok(w.iter().zip(energies).map(|(w, e)| w * e).sum())
}

/// C(T) = (⟨E²⟩ − ⟨E⟩²) / T², evaluated as Σ w (E − ⟨E⟩)² / T².
pub fn specific_heat(log_g: &[f64], energies: &[f64], temperature: f64) -> Result<f64> {
    let w = boltzmann_weights(log_g, energies, temperature)?;
    let mean: f64 = w.iter().zip(energies).map(|(w, e)| w * e).sum();
    let var: f64 = w
        .iter()
        .zip(energies)
        .map(|(w, e)| w * (e - mean) * (e - mean))
        .sum();
    Ok(var / (temperature * temperature))
}

/// `(T, C(T))` over a grid.
pub fn specific_heat_curve(
    log_g: &[f64],
    energies: &[f64],
    grid: &TemperatureGrid,
) -> Result<Vec<(f64, f64)>> {
    grid.temperatures()
        .into_iter()
        .map(|t| Ok((t, specific_heat(log_g, energies, t)?)))
        .collect()
}

/// Convention fixing the additive constant of a log-DOS before comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Anchor {
    /// Σ exp(log_g) = 1.
    #[default]
    SumToOne,
    /// Lowest level equal to the reference's lowest level.
    GroundState,
    /// Zero mean.
    MeanZero,
}

impl Anchor {
    pub fn name(self) -> &'static str {
        match self {
            Anchor::SumToOne => "sum_to_one",
            Anchor::GroundState => "ground_state",
            Anchor::MeanZero => "mean_zero",
        }
    }
}

impl FromStr for Anchor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum_to_one" => Ok(Anchor::SumToOne),
            "ground_state" => Ok(Anchor::GroundState),
            "mean_zero" => Ok(Anchor::MeanZero),
            other => Err(invalid(format!(
                "unknown anchor `{other}` (expected sum_to_one, ground_state or mean_zero)"
            ))),
        }
    }
}

/// Returns `(estimate, reference)` shifted to the same convention.
pub fn anchor_pair(estimate: &[f64], reference: &[f64], anchor: Anchor) -> Result<(Vec<f64>, Vec<f64>)> {
    if estimate.len() != reference.len() || estimate.is_empty() {
        return Err(invalid(format!(
            "estimate has {} levels, reference has {}",
            estimate.len(),
            reference.len()
        )));
    }
    let mut est = estimate.to_vec();
    let mut refr = reference.to_vec();
    match anchor {
        Anchor::SumToOne => {
            for v in [&mut est, &mut refr] {
                let z = log_sum_exp(v);
                v.iter_mut().for_each(|x| *x -= z);
            }
        }
        Anchor::GroundState => {
            let shift = refr[0] - est[0];
            est.iter_mut().for_each(|x| *x += shift);
        }
        Anchor::MeanZero => {
            center(&mut est);
            center(&mut refr);
        }
    }
    Ok((est, refr))
}

/// ε = (1/(N−1)) Σ |1 − log g_est(E_n) / log g_ref(E_n)| after anchoring.
///
/// `energies` is only used to name a degenerate level in the error.
pub fn epsilon_error(
    estimate: &[f64],
    reference: &[f64],
    energies: &[i64],
    anchor: Anchor,
) -> Result<f64> {
    let (est, refr) = anchor_pair(estimate, reference, anchor)?;
    if est.len() < 2 {
        return Err(invalid("epsilon needs at least two levels"));
    }
    let mut total = 0.0;
    for (n, (e, r)) in est.iter().zip(&refr).enumerate() {
        if r.abs() < 1e-12 {
            return Err(Error::DegenerateReference {
                level: n,
                energy: energies.get(n).copied().unwrap_or(n as i64),
            });
        }
        total += (1.0 - e / r).abs();
    }
    Ok(total / (est.len() - 1) as f64)
}

/// ‖u − u*‖² with both sides shifted to zero sum.
pub fn l2_error(estimate: &[f64], reference: &[f64]) -> Result<f64> {
    let (est, refr) = anchor_pair(estimate, reference, Anchor::MeanZero)?;
    Ok(est.iter().zip(&refr).map(|(a, b)| (a - b) * (a - b)).sum())
}
