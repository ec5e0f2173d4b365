//! Hierarchical T-meshes, spline space dimensions, and B-spline basis assembly.
//!
//! Everything is computed in exact rational arithmetic: mesh coordinates,
//! conformality moment systems, rank computations, and per-cell polynomials.
//! The crate builds hierarchical T-meshes level by level, extends them for a
//! given bidegree, evaluates the closed-form dimension count of the spline
//! space with maximal smoothness, and cross-checks it against two independent
//! exact rank oracles. A basis of the spline space is assembled from per-edge
//! knot windows and verified for independence and span.

pub mod basis;
pub mod conformality;
pub mod coord;
pub mod dimension;
pub mod extension;
pub mod hierarchy;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod render;

pub use coord::Coord;
pub use mesh::TMesh;
