use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::point::{dist_sq, Point};
use crate::error::{Error, Result};

/// A finite set of points stored contiguously.
///
/// Serializes as a list of coordinate arrays.
#[derive(Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    flat: Vec<f64>,
}

/// Outcome of a linear scan for the points nearest to a query.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CloudScan {
    /// `(index, squared distance)` in increasing index order.
    pub cands: Vec<(usize, f64)>,
    /// Smallest squared distance among points outside the tie window.
    pub runner_sq: f64,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyCloud)?.dim();
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            p.check_dim(dim)?;
            flat.extend_from_slice(p.coords());
        }
        Ok(PointCloud { dim, flat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.flat[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point(&self, i: usize) -> Point {
        Point::from_finite(self.coords(i).to_vec())
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.flat.chunks_exact(self.dim)
    }

    pub fn points(&self) -> Vec<Point> {
        self.iter().map(|c| Point::from_finite(c.to_vec())).collect()
    }

    /// Single pass collecting every point whose distance is within `tol` of
    /// the minimum, skipping `exclude`.
    pub(crate) fn scan(&self, q: &[f64], tol: f64, exclude: Option<usize>) -> CloudScan {
        let mut state = ScanState::default();
        if self.dim == 2 {
            let (qx, qy) = (q[0], q[1]);
            for (i, p) in self.flat.chunks_exact(2).enumerate() {
                if Some(i) == exclude {
                    continue;
                }
                let (dx, dy) = (p[0] - qx, p[1] - qy);
                state.push(i, dx * dx + dy * dy, tol);
            }
        } else {
            for (i, p) in self.iter().enumerate() {
                if Some(i) == exclude {
                    continue;
                }
                state.push(i, dist_sq(p, q), tol);
            }
        }
        CloudScan { cands: state.cands, runner_sq: state.runner }
    }
}

struct ScanState {
    best: f64,
    thresh: f64,
    runner: f64,
    cands: Vec<(usize, f64)>,
}

impl Default for ScanState {
    fn default() -> Self {
        ScanState {
            best: f64::INFINITY,
            thresh: f64::INFINITY,
            runner: f64::INFINITY,
            cands: Vec::new(),
        }
    }
}

impl ScanState {
    #[inline(always)]
    fn push(&mut self, i: usize, d2: f64, tol: f64) {
        if d2 > self.thresh {
            if d2 < self.runner {
                self.runner = d2;
            }
            return;
        }
        self.cands.push((i, d2));
        if d2 < self.best {
            self.best = d2;
            let edge = d2.sqrt() + tol;
            self.thresh = (edge * edge).max(d2);
            let (thresh, runner) = (self.thresh, &mut self.runner);
            self.cands.retain(|&(_, e)| {
                if e <= thresh {
                    true
                } else {
                    *runner = runner.min(e);
                    false
                }
            });
        }
    }
}

impl std::fmt::Debug for PointCloud {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl Serialize for PointCloud {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for PointCloud {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let points = Vec::<Point>::deserialize(deserializer)?;
        PointCloud::new(points).map_err(serde::de::Error::custom)
    }
}
