//! Certifier for sphere equilibria of Riesz interaction energies with an
//! external field.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod ext;
pub mod fields;
pub mod oracle;
pub mod quad;
pub mod specfun;
pub mod sphere_kernel;

pub use error::{Error, Result};
