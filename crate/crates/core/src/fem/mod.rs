//! Lagrange finite element spaces on quadrilateral meshes.

pub mod constraints;
pub mod dofs;
pub mod quadrature;
pub mod shape;

pub use constraints::ConstraintSet;
pub use dofs::DofHandler;
pub use quadrature::QuadRule;
