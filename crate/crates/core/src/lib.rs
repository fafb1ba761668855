//! Phase-field brittle fracture toolkit.
//!
//! Provides closed-form penalty tuning for the irreversibility and
//! crack-recovery penalties of variational phase-field models, 1D
//! reference profiles with an independent finite-difference oracle, and
//! a 2D staggered P1 finite-element solver for plane-strain benchmarks.

pub mod assemble;
pub mod config;
pub mod dof;
pub mod error;
pub mod evolution;
pub mod material;
pub mod mesh;
pub mod meshgen;
pub mod profiles;
pub mod runner;
pub mod sparse;
pub mod split;
pub mod tuner;

pub use error::{Error, Result};
