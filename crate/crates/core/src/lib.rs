//! Perturbation stratification of square complex matrices.
//!
//! The crate covers three group actions on `n × n` complex matrices:
//! similarity `S⁻¹AS`, congruence `SᵀAS` and *congruence `S*AS`. For each it
//! offers canonical structures, closure graphs of orbits and bundles,
//! miniversal deformation templates and tangent-space codimensions, together
//! with a numerical reduction engine and an empirical perturbation lab.

pub mod congruence;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod matrix_io;
pub mod order;
pub mod reduction;
pub mod structure;
pub mod tangent;
pub mod template;

pub use error::{Result, StrataError};
