//! Euclidean points and set-valued projections onto closed sets.
//!
//! Every primitive is projected in closed form. Unions enumerate all their
//! members; point clouds are scanned linearly.

mod cloud;
mod point;
mod project;
mod spec;

pub use cloud::PointCloud;
pub use point::Point;
pub use project::{contains, distance, nearest_in_cloud, project, Nearest, ProjectionResult, DEFAULT_TIE_TOL};
pub use spec::ProjectorSpec;

