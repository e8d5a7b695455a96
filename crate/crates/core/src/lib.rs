//! Mixed Hellinger-Reissner virtual elements for plane linear elasticity.
//!
//! The unknowns are a symmetric stress field, discretized by H(div)-conforming
//! virtual elements of order `k >= 1` on arbitrary polygons, and a
//! discontinuous piecewise `P_k` displacement. Each element only exposes its
//! degrees of freedom: edge traction moments and divergence moments against
//! the complement of the rigid body motions. Everything else (the energy
//! projection, the boundary stabilization, the divergence) is computed from
//! those values.
//!
//! Module map:
//!
//! * [`mesh`]: polygonal meshes, the eight test mesh families, file IO and
//!   shape-regularity diagnostics.
//! * [`quadrature`]: Gauss rules on edges, collapsed rules on triangles and
//!   fan-triangulated polygons.
//! * [`polybasis`]: scaled monomials, rigid body motions and their
//!   orthogonal complement.
//! * [`material`]: plane-strain isotropic stiffness and compliance.
//! * [`element`]: local spaces, projector, stabilization, local matrices.
//! * [`assembly`]: global numbering, saddle-point assembly and sparse solve.
//! * [`analysis`]: manufactured solutions, error norms, rates, verification.

pub mod analysis;
pub mod assembly;
pub mod element;
mod error;
pub mod material;
pub mod mesh;
pub mod polybasis;
pub mod quadrature;

pub use error::{Error, Result};

/// Points in the plane.
pub type Point = nalgebra::Point2<f64>;
/// Vectors in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;
