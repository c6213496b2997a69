//! Pseudospectral simulation and verification tools for the stochastic
//! two-component Camassa-Holm system on the torus.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod harness;
pub mod operators;
pub mod quadrature;
pub mod spectral;
pub mod stochastics;

pub use error::{Error, Result};
pub use spectral::{Grid, SpectralField, State};
