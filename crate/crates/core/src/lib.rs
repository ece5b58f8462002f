//! Random walks with exactly stable increments conditioned to stay
//! nonnegative with a small endpoint: limit laws of the prospective minimum,
//! the renewal and meander objects they depend on, and Monte Carlo checks.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod acceptance;
pub mod error;
pub mod experiment;
pub mod ladder;
pub mod limits;
pub mod quadrature;
pub mod rng;
pub mod stable;
pub mod walk;

pub use error::{Error, Result};
pub use stable::{validate_params, StableParams};
