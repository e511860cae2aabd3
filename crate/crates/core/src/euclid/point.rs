use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of a small-dimensional Euclidean space.
///
/// Coordinates are always finite. Serializes as a bare JSON array.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidSpec("point must have at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Point { coords })
    }

    /// Builds a point from coordinates already known to be finite.
    pub(crate) fn from_finite(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Point { coords }
    }

    pub fn xy(x: f64, y: f64) -> Result<Self> {
        Point::new(vec![x, y])
    }

    pub fn origin(dim: usize) -> Self {
        Point { coords: vec![0.0; dim.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.coords, &other.coords)
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got: self.dim() })
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.coords).finish()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.coords
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    match a {
        [x] => x.abs(),
        [x, y] => x.hypot(*y),
        _ => dot(a, a).sqrt(),
    }
}

pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    match (a, b) {
        ([x0], [y0]) => (x0 - y0).abs(),
        ([x0, x1], [y0, y1]) => (x0 - y0).hypot(x1 - y1),
        _ => dist_sq(a, b).sqrt(),
    }
}
