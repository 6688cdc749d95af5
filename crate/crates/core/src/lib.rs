//! Simulation of a driven qubit exchanging photon pairs with a nonlinear,
//! thermally damped oscillator.
//!
//! - [`algebra`]: truncated Fock and su(1,1) sector operators.
//! - [`model`]: physical parameters and the rates derived from them.
//! - [`dynamics`]: full and reduced master-equation generators, time
//!   evolution, steady states and photon statistics.
//! - [`analytic`]: closed-form steady-state statistics of the reduced model.
//! - [`sweep`]: configuration, detuning sweeps, CSV/SVG output and
//!   cross-validation reports.

pub mod algebra;
pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod sweep;

pub use error::{Error, Result};
