//! Periodic-solution analysis for the nonautonomous Mackey-Glass hematopoiesis
//! equation with several time-varying delays.
//!
//! The crate is organised bottom-up:
//!
//! - [`periodic`] and [`model`]: coefficient functions, model types, exponent
//!   classification and the model file format.
//! - [`analysis`]: the averaged balance function `phi`, the pointwise envelopes
//!   `alpha`/`beta`, sign-change scans, hypothesis checkers for the existence
//!   and multiplicity results, and constructive parameter synthesis.
//! - [`dde`]: fixed-step method-of-steps integration with dense output.
//! - [`orbits`]: harmonic-balance location and validation of periodic orbits.

pub mod analysis;
pub mod dde;
pub mod error;
mod format;
pub mod model;
pub mod numeric;
pub mod orbits;
pub mod periodic;

pub use error::{Error, Result};
pub use model::{classify, ExponentClass, GrowthCase, Model, Term, TermClassification};
pub use periodic::{Harmonic, PeriodicFn};
