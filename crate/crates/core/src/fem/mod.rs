//! Lagrange spaces, quadrature and assembly of the bilinear forms.

pub mod assembly;
pub mod basis;
pub mod dirichlet;
pub mod quadrature;
pub mod space;

pub use assembly::{
    assemble_divergence, assemble_elasticity, assemble_load, assemble_mass, assemble_stiffness, Load,
};
pub use dirichlet::{apply_dirichlet, DirichletElimination, DofConstraintSet};
pub use quadrature::QuadratureRule;
pub use space::{build_field_spaces, build_space, evaluate_field, FeSpace, FieldSpaces};
