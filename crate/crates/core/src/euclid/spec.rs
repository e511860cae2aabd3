use serde::{Deserialize, Serialize};

use super::cloud::PointCloud;
use super::point::{norm, Point};
use crate::error::{Error, Result};

/// Declarative description of a closed subset of `R^d`.
///
/// The JSON form is internally tagged by `"type"`:
///
/// ```json
/// {"type":"union","members":[
///   {"type":"sphere","center":[0,0],"radius":1.0},
///   {"type":"points","coords":[[2,0],[0.5,1.5]]}]}
/// ```
///
/// A halfspace is the set `{x : <normal, x> <= offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawSpec")]
pub enum ProjectorSpec {
    Sphere { center: Point, radius: f64 },
    Ball { center: Point, radius: f64 },
    Box { min: Point, max: Point },
    Halfspace { normal: Point, offset: f64 },
    Segment { a: Point, b: Point },
    Points { coords: PointCloud },
    Union { members: Vec<ProjectorSpec> },
}

// Deserialization target; every value goes through `ProjectorSpec::validate`.
#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawSpec {
    Sphere { center: Point, radius: f64 },
    Ball { center: Point, radius: f64 },
    Box { min: Point, max: Point },
    Halfspace { normal: Point, offset: f64 },
    Segment { a: Point, b: Point },
    Points { coords: PointCloud },
    Union { members: Vec<ProjectorSpec> },
}

impl TryFrom<RawSpec> for ProjectorSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let spec = match raw {
            RawSpec::Sphere { center, radius } => ProjectorSpec::Sphere { center, radius },
            RawSpec::Ball { center, radius } => ProjectorSpec::Ball { center, radius },
            RawSpec::Box { min, max } => ProjectorSpec::Box { min, max },
            RawSpec::Halfspace { normal, offset } => ProjectorSpec::Halfspace { normal, offset },
            RawSpec::Segment { a, b } => ProjectorSpec::Segment { a, b },
            RawSpec::Points { coords } => ProjectorSpec::Points { coords },
            RawSpec::Union { members } => ProjectorSpec::Union { members },
        };
        spec.validate()?;
        Ok(spec)
    }
}

const UNIT_NORMAL_TOL: f64 = 1e-12;

impl ProjectorSpec {
    pub fn sphere(center: Point, radius: f64) -> Result<Self> {
        let s = ProjectorSpec::Sphere { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        let s = ProjectorSpec::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn cuboid(min: Point, max: Point) -> Result<Self> {
        let s = ProjectorSpec::Box { min, max };
        s.validate()?;
        Ok(s)
    }

    /// Halfspace `{x : <normal, x> <= offset}`; `normal` is rescaled to unit
    /// length and `offset` with it.
    pub fn halfspace(normal: Point, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 0.0) || !offset.is_finite() {
            return Err(Error::InvalidSpec("halfspace needs a nonzero normal and finite offset".into()));
        }
        let unit = Point::new(normal.coords().iter().map(|c| c / n).collect())?;
        let s = ProjectorSpec::Halfspace { normal: unit, offset: offset / n };
        s.validate()?;
        Ok(s)
    }

    pub fn segment(a: Point, b: Point) -> Result<Self> {
        let s = ProjectorSpec::Segment { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn points(points: Vec<Point>) -> Result<Self> {
        Ok(ProjectorSpec::Points { coords: PointCloud::new(points)? })
    }

    pub fn union(members: Vec<ProjectorSpec>) -> Result<Self> {
        let s = ProjectorSpec::Union { members };
        s.validate()?;
        Ok(s)
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            ProjectorSpec::Sphere { center, .. } | ProjectorSpec::Ball { center, .. } => center.dim(),
            ProjectorSpec::Box { min, .. } => min.dim(),
            ProjectorSpec::Halfspace { normal, .. } => normal.dim(),
            ProjectorSpec::Segment { a, .. } => a.dim(),
            ProjectorSpec::Points { coords } => coords.dim(),
            ProjectorSpec::Union { members } => members.first().map_or(0, ProjectorSpec::dim),
        }
    }

    /// Whether the described set is convex. Unions and spheres never count,
    /// a point cloud only when it is a single point.
    pub fn is_convex(&self) -> bool {
        match self {
            ProjectorSpec::Sphere { .. } | ProjectorSpec::Union { .. } => false,
            ProjectorSpec::Points { coords } => coords.len() == 1,
            _ => true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        match self {
            ProjectorSpec::Sphere { radius, .. } | ProjectorSpec::Ball { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return invalid("radius must be positive and finite");
                }
            }
            ProjectorSpec::Box { min, max } => {
                max.check_dim(min.dim())?;
                if min.coords().iter().zip(max.coords()).any(|(lo, hi)| lo > hi) {
                    return invalid("box needs min <= max componentwise");
                }
            }
            ProjectorSpec::Halfspace { normal, offset } => {
                if !offset.is_finite() {
                    return invalid("halfspace offset must be finite");
                }
                if (norm(normal.coords()) - 1.0).abs() > UNIT_NORMAL_TOL {
                    return invalid("halfspace normal must have unit norm");
                }
            }
            ProjectorSpec::Segment { a, b } => b.check_dim(a.dim())?,
            ProjectorSpec::Points { coords } => {
                if coords.is_empty() {
                    return Err(Error::EmptyCloud);
                }
            }
            ProjectorSpec::Union { members } => {
                let first = members.first().ok_or_else(|| Error::InvalidSpec("union needs at least one member".into()))?;
                let dim = first.dim();
                for m in members {
                    m.validate()?;
                    if m.dim() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
                    }
                }
            }
        }
        Ok(())
    }
}
