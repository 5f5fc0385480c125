//! Conditioned Poisson–Voronoi and Crofton zero cells around a planar convex body.
//!
//! The crate builds the zero cell of a Poisson process conditioned to leave a
//! convex body `K` uncovered, computes the deterministic objects that govern
//! it (support functions, Voronoi flowers, Steiner points, limit shapes) and
//! compares Monte Carlo estimates with closed-form limit constants.
//!
//! See `examples/` for one runnable program per capability.

pub mod body;
pub mod cell;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod export;
pub mod flower;
pub mod geom;
pub mod increment;
pub mod laws;
pub mod quad;
pub mod render;
pub mod rng;
pub mod sampler;
pub mod shape;
pub mod stats;

pub use body::{BodyKind, BodySpec, ConvexBody};
pub use error::{Error, Result};
pub use geom::{Angle, Point};
