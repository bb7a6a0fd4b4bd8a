//! Finite-dimensional unitary irreducible representations of gl(1|n)
//! in a Gelfand-Zetlin basis, the spectrum of self-adjoint odd elements,
//! and the Wigner quantum oscillator chain built on them.

pub mod chain;
pub mod cli;
pub mod error;
pub mod gz;
pub mod linalg;
pub mod odd;
pub mod rep;
pub mod scalars;
pub mod verify;

pub use error::{Error, Result};
