//! Siegel modular forms of degree `g` as truncated Fourier expansions:
//! the theta operator, `U(p)`, Fourier-Jacobi coefficients, Rankin-Cohen
//! brackets, the `U(p)` congruence criterion and lattice theta series.

pub mod bracket;
pub mod criterion;
pub mod expansion;
pub mod lattice;
pub mod schottky;
pub mod twice;

pub use expansion::SiegelExpansion;
pub use twice::TwiceT;
