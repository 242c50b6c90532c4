//! Pricing of variable annuities (accumulation, death and surrender benefits)
//! in a hybrid interest-rate/equity model driven by two independent NIG
//! Lévy processes.
//!
//! Prices are closed-form Fourier integrals evaluated by importance-sampled
//! Monte Carlo. Adaptive cubature and a path-simulation pricer serve as
//! independent checks.

pub mod actuarial;
pub mod error;
pub mod integrate;
pub mod levy_core;
pub mod market_model;
pub mod oracle;
pub mod pricing;

pub use error::{Result, VaError};
pub use num_complex::Complex64;
