//! Scattering matrices and steady-state currents for a two-level quantum dot
//! coupled to two tight-binding leads and a single-mode photon resonator.

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod currents;
pub mod dot;
pub mod error;
pub mod lead;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod scattering;
pub mod symmetry;

pub use error::{JclError, Result};
