//! Jacobi forms of lattice index: indices, Fourier expansions, orbit coordinates.

pub mod expansion;
pub mod index;
pub mod orbits;

pub use expansion::{JacobiExpansion, JacobiModP};
pub use index::JacobiIndex;
pub use orbits::FourierClassSpace;
