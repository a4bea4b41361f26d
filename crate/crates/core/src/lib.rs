//! Online Bayesian persuasion with Gaussian priors and quadratic costs.
//!
//! The sender commits to a linear-plus-noise signaling policy each round
//! without knowing the receiver's type. Through the receiver's best
//! response the expected sender cost becomes a convex function of the
//! error covariance `Σ_e` on the interval `[O, Σ₀]`, which turns the
//! repeated game into online convex optimization:
//!
//! * [`matcore`] symmetric-matrix numerics and the interval projection,
//! * [`game`] best responses, the `V` matrix, the objective and its bounds,
//! * [`policy`] synthesis of policies realizing a target posterior,
//! * [`learners`] online gradient descent, bandit FKM and FTPL,
//! * [`adversary`] receiver streams,
//! * [`harness`] seeded experiments, CSV/JSON/SVG output.

// Validation uses `!(x > 0.0)` on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod error;
pub mod game;
pub mod harness;
pub mod learners;
pub mod matcore;
pub mod policy;

pub use error::{Error, Result};
