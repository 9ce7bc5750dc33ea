//! The convex objective `h(u) = log Σ exp(u*_n − u_n)` minimised over the
//! zero-sum plane, and its gradient. The negative gradient is the level law of
//! the sampler's target, which the WL update estimates with a one-hot vector.

use crate::numeric::{log_sum_exp, softmax};

fn differences(u: &[f64], u_star: &[f64]) -> Vec<f64> {
    assert_eq!(u.len(), u_star.len(), "objective inputs differ in length");
    u_star.iter().zip(u).map(|(s, x)| s - x).collect()
}

pub fn objective(u: &[f64], u_star: &[f64]) -> f64 {
    log_sum_exp(&differences(u, u_star))
}

/// `∂h/∂u_n = −exp(u*_n − u_n) / Σ_i exp(u*_i − u_i)`.
pub fn gradient(u: &[f64], u_star: &[f64]) -> Vec<f64> {
    let mut g = softmax(&differences(u, u_star));
    for x in &mut g {
        *x = -*x;
    }
    g
}
