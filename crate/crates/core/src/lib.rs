//! Norm-dependent (L1) Lamperti transform between self-similar Markov processes on the positive
//! orthant and Markov additive processes on `ℝ × S₁^{d,+}`, the closed-form objects attached to
//! them, and Monte Carlo checks of those formulas against path simulation.

// `!(x > 0.0)` is the NaN-rejecting form; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytics;
pub mod clock;
pub mod csvio;
pub mod error;
pub mod geometry;
pub mod lamperti;
pub mod levy;
pub mod path;
pub mod quadrature;
pub mod rng;
pub mod ssmp;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
