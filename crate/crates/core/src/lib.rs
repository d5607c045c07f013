//! Numerical laboratory for circle packings, good straight-line embeddings,
//! discrete and piecewise-linear Dirichlet capacities, and Brownian hitting
//! estimates of planar triangulations.

pub mod geometry;
pub mod linalg;
pub mod brownian;
pub mod capacity;
pub mod embedding;
pub mod packing;
pub mod rng;
pub mod spatial;
pub mod transfer;
pub mod triangulation;

pub use geometry::Point;
pub use triangulation::{ExhaustionSequence, Family, SourceSet, Triangulation, TriangulationError};
