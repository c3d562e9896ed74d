//! Kirchhoff thin-plate finite elements for rectangular, circular and
//! cross-shaped planforms.

pub mod assembly;
pub mod element;
pub mod mesh;

pub use assembly::{apply_boundary, assemble, assemble_with, BoundaryCondition, ElementProps, SystemMatrices};
pub use mesh::{generate_mesh, Edge, Mesh, PlateGeometry, DOFS_PER_NODE};
