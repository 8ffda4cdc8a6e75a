//! Chain complexes over truncated power series, Smith forms, dg-nerve checks,
//! straight-line path combinatorics, equivariant Morse complexes and the
//! linear symplectic model.

pub mod acceptance;
pub mod chain_complex;
pub mod coeff_ring;
pub mod colimit;
pub mod dg_nerve;
pub mod equivariant_morse;
pub mod error;
pub mod fg_module;
pub mod fp;
pub mod gen;
pub mod io;
pub mod linear_model;
pub mod oracle;
pub mod par;
pub mod simplex_paths;

pub use error::{Error, Result};
