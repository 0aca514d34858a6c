//! Pseudo-spectral laboratory for the fractional KdV equation
//! `u_t = D^alpha u_x - u u_x`, `0 < alpha < 1`: weight functions, commutator
//! expansions, a stiff time integrator and weighted-energy diagnostics.

pub mod commutators;
pub mod diagnostics;
pub mod error;
pub mod experiment_io;
pub mod quadrature;
pub mod rng;
pub mod solver;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
