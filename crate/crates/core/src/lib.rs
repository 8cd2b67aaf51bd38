//! Confined quantum harmonic oscillator treated as an f-deformed oscillator.
//!
//! Units throughout are ħ = m = ω = 1 unless a function takes them explicitly.

pub mod algebra;
pub mod drive;
pub mod error;
pub mod field;
pub mod nlcs;
pub mod ode;
pub mod quadrature;
pub mod special;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
