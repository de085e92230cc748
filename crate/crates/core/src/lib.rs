//! Sparse signal recovery by generalized approximate message passing with
//! built-in MAP estimation of the prior and noise parameters.
//!
//! The crate is layered bottom-up: [`special_fn`] supplies stable scalar
//! kernels, [`channels`] the scalar estimators `g_in` / `g_out`, [`param_est`]
//! the per-iteration parameter updates, [`gamp`] the solver itself,
//! [`state_evolution`] its Monte-Carlo performance predictor and [`harness`]
//! problem generation, sweeps and file IO.

pub mod channels;
pub mod error;
pub mod gamp;
pub mod harness;
pub mod param_est;
pub mod special_fn;
pub mod state_evolution;

pub use error::{Error, Result};
