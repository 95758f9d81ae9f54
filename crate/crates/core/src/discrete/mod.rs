//! Discretizations of interface complexes: polyline complexes of planar
//! partitions with junction conditions, index forms and stability margins,
//! and icosahedral meshes of closed interfaces for spectral, Brascamp-Lieb
//! and Bochner checks.

mod complex;
mod mesh2d;
mod operators;
mod sparse;

pub use complex::{
    build_complex_1d, build_complex_1d_with, ArcCurve, ComplexConfig, EndTag, InterfaceMesh1D, Junction,
    PartitionComplex, Resolution, DEFAULT_RADIUS, MIN_VERTICES,
};
pub use mesh2d::{
    bl_check, bl_sides, bochner_gap, mesh_sphere, random_smooth_function, spectrum, BlReport, BochnerGap, InterfaceMesh2D, MAX_DENSE,
};
pub use operators::{
    assemble_operators, delta1_vol, q0_eval, random_field, stability_margin, FieldClass, MarginMode, OperatorSet,
    Q0Mode,
};
pub use sparse::SparseMatrix;

#[cfg(test)]
mod tests;
