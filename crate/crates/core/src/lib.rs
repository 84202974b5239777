//! Substructuring toolkit for nonoverlapping domain decomposition.
//!
//! The crate covers the pipeline from a finite element mesh and an
//! element-to-subdomain partition to a verified BDDC solve:
//!
//! * [`mesh`]: mesh representation, structured fixtures, and stiffness
//!   assembly for Laplace and linear elasticity (tri3/quad4/tet4/hex8),
//! * [`partition`]: partition files, a coordinate-bisection fallback
//!   partitioner, and connectivity components,
//! * [`interface`]: classification of interface nodes into faces, edges,
//!   and vertices by their sharing sets,
//! * [`corners`]: coarse-node (corner) selection: the face-based
//!   algorithm, its minimal variant, and an edge-based baseline,
//! * [`bddc`]: Schur reduction, constraint construction, the BDDC
//!   preconditioner, PCG with a Lanczos condition estimate, and
//!   invertibility diagnostics,
//! * [`cli`]: sweep and comparison drivers behind the `substruct` binary.
//!
//! All numerics are dense per subdomain and meant for desk-scale
//! verification, not production-scale runs.

pub mod bddc;
pub mod cli;
pub mod corners;
pub mod interface;
pub mod linalg;
pub mod mesh;
pub mod partition;
pub mod sparse;
