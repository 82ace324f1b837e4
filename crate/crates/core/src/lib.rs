//! Finite-element solver for the four-field (displacement, total pressure,
//! two generalized pressures) multi-network poroelasticity model.
//!
//! The crate provides structured meshes, Taylor–Hood spaces, a monolithic
//! backward-Euler stepper and a global-in-time iterative decoupling whose
//! mechanics solves run concurrently across time levels.

pub mod analysis;
pub mod decoupled;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod model;
pub mod monolithic;
pub mod sparse;

pub use error::{Error, Result};
