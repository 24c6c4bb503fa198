//! Finite element spaces and assembly: P1 displacement with facet bubbles,
//! lowest-order Raviart-Thomas flux, piecewise-constant pressure.

pub mod assembly;
pub mod bc;
pub mod quadrature;

pub use assembly::{
    assemble_all, assemble_div_coupling, assemble_elasticity, assemble_flux_mass, assemble_loads,
    assemble_p0_mass, AssembledBlocks, AssemblyInput, DofCounts,
};
pub use bc::{apply_essential_bcs, BoundaryCondition, BoundarySpec, Constraints, RigidPlate};
pub use quadrature::QuadratureRule;
