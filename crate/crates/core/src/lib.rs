//! Numerical toolkit for doubly-periodic instantons: elliptic Higgs fields
//! and their spectral curves, the flat-model Green operator, characteristic
//! class bookkeeping and discrete Hitchin-equation checks.

pub mod acceptance;
pub mod argument;
pub mod cohomology;
pub mod elliptic;
pub mod error;
pub mod flat;
pub mod higgs;
pub mod hitchin;
pub mod lattice;
pub mod linalg;
pub mod ratmap;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
