//! Exact q-series, Jacobi forms of lattice index, restriction to scalar
//! index, and the mod p filtration analysis of the heat operator.

pub mod arith;
pub mod error;
pub mod fixtures;
pub mod jacobi;
pub mod linalg;
pub mod modp;
pub mod qseries;
pub mod restriction;
pub mod scalar;

pub use error::{Error, Result};
