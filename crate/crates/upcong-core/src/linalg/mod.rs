//! Linear algebra over finite fields, over the rationals and over the integers.

pub mod exact;
pub mod fp;
pub mod hnf;
