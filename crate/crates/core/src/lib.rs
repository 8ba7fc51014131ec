//! Sphere-packing bounds for symmetric classical-quantum channels.

pub mod channel;
pub mod cli;
pub mod divergence;
pub mod error;
pub mod exponent;
pub mod bound;
pub mod largedev;
pub mod oracle;
pub mod qcore;
pub mod search;
pub mod value;

pub use channel::{empirical_distribution, preset, preset_with, ProbabilityVector, SymmetricCqChannel};
pub use error::{Error, Result, Violation};
pub use qcore::{CyclicUnitary, DensityOperator, HermitianMatrix};
pub use value::ExtendedReal;
