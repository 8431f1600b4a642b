//! Topological certification of tangent vector fields and line fields on
//! surfaces.
//!
//! The crate computes Brouwer degrees, vector-field indices, inward boundary
//! indices and their averaged (mean-oscillation based) counterparts for
//! tangent fields on a catalog of parametric surfaces, constructs
//! nowhere-vanishing extensions of boundary data when the topology permits,
//! and carries the same machinery over to Q-tensor line fields with
//! half-integer indices.

pub mod degree;
pub mod error;
pub mod expr;
pub mod extension;
pub mod fields;
pub mod geometry;
pub mod index;
pub mod linalg;
pub mod par;
pub mod qtensor;
pub mod report;
pub mod vmo;

pub use error::{Error, Result};
