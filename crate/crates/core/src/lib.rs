//! Density-of-states estimation for two-dimensional lattice spin models with the
//! Wang-Landau algorithm, viewed as stochastic gradient descent on a log-sum-exp
//! objective, and its momentum-accelerated variant.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: periodic L×L Ising and q-state Potts lattices, energies and energy ladders.
//! * [`sampler`]: the Metropolis kernel targeting a flat distribution over energy levels.
//! * [`estimator`]: the log-DOS estimate, the WL and momentum (AWL) updates with lazy
//!   per-level catch-up, and the learning-rate schedule.
//! * [`oracle`]: exact enumeration and dense reference implementations for small systems.
//! * [`thermo`]: internal energy, specific heat and error metrics.
//! * [`runner`]: experiment configuration, seeded replicates and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod runner;
pub mod sampler;
pub mod thermo;

pub use error::{Error, Result};
