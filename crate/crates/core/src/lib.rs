//! Stabilized three-field Biot poroelasticity on simplicial meshes.
//!
//! Displacement is discretized with P1 plus facet bubbles, Darcy flux with
//! lowest-order Raviart-Thomas and pressure with piecewise constants. The
//! crate assembles the full, diagonal-bubble and bubble-eliminated systems,
//! provides block diagonal / lower / upper preconditioners (exact or built
//! from AMG-preconditioned inner solves), flexible GMRES, and dense checks
//! of the discrete stability constants.

pub mod amg;
pub mod analysis;
pub mod bench;
pub mod biot;
pub mod error;
pub mod fem;
pub mod krylov;
pub mod la;
pub mod mesh;
pub mod precond;

pub use error::{BiotError, Result};
