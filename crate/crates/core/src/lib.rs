//! Spherical Voronoi partitions on the model spaces (sphere, Euclidean,
//! hyperbolic and Gaussian), their conformally flattening boundary
//! potentials, and numerical checks of the associated identities, index
//! forms and Brascamp-Lieb inequalities.

pub mod discrete;
pub mod error;
pub mod families;
pub mod flatness;
pub mod geometry;
pub mod mobius;
pub mod partitions;
pub mod potential;
pub mod rng;
pub mod verification;

pub use error::{Error, Result};
