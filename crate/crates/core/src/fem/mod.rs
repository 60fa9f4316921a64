//! Continuous Galerkin discretization on structured simplex meshes.

pub mod assembly;
pub mod basis;
pub mod mesh;
pub mod quadrature;
pub mod space;
pub mod sparse;

pub use assembly::{BoundaryCondition, MassOperator, PhysicsModel, SpatialOperator};
pub use mesh::{BoundaryTag, Mesh};
pub use space::FeSpace;
