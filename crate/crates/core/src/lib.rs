//! Signatures of algebraic Hilbert–Poincaré complexes over ℂ and over
//! finite group algebras.

pub mod bordism;
pub mod error;
pub mod generate;
pub mod hpcomplex;
pub mod io;
pub mod ktheory;
pub mod signature;
pub mod simplicial;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{CMatrix, DEFAULT_TOL};
