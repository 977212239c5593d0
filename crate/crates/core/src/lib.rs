//! Discrete-time voter model processes on arbitrary interaction matrices:
//! simulation of the synchronous, asynchronous and linear noisy dynamics,
//! consensus-time functionals and bounds, stationary correlation analysis,
//! and regularized maximum-likelihood estimation of the interaction matrix
//! from observed traces.
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature and enable `libm` for embedded or wasm targets. File
//! formats and the command-line front end live in the companion `voterlab`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("voterlab-core needs either the `std` (default) or the `libm` feature");

pub mod chain;
pub mod consensus;
pub mod correlation;
pub mod error;
pub mod inference;
pub mod instances;
pub mod linalg;
pub(crate) mod math;
pub mod model;
pub mod pathmodel;
pub mod rng;
pub mod simulate;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
