//! Set-valued Euclidean projections, the method of alternating projections,
//! and a planar instance whose iterates cluster on the whole unit circle.
//!
//! The crate is organized bottom-up:
//!
//! * [`euclid`]: points, closed-set descriptions and their projectors;
//! * [`spiral`]: the curve `ρ(α)(cos α, sin α)` and its step solver;
//! * [`sequence`]: the iterate sequence walked along that curve, with checks;
//! * [`map_driver`]: alternating projections over any two sets;
//! * [`counterexample`]: the two point-plus-circle sets built from the sequence;
//! * [`finite_union`]: randomized runs over finite unions of convex sets.

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with the
// values that are out of range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference values in tests keep every digit of the high-precision oracle.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod counterexample;
pub mod error;
pub mod euclid;
pub mod finite_union;
pub mod map_driver;
pub mod numfmt;
pub mod sequence;
pub mod spiral;

pub use error::{Error, Result, Side};
pub use euclid::{Point, PointCloud, ProjectionResult, ProjectorSpec};
pub use spiral::Angle;
