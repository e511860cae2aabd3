use serde::Serialize;

use super::cloud::PointCloud;
use super::point::{dist, dot, norm, Point};
use super::spec::ProjectorSpec;
use crate::error::{Error, Result};

/// Default tolerance for treating two minimizer distances as tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Below this distance a sphere query is considered to sit at the center.
const CENTER_TOL: f64 = 1e-12;

/// The set of nearest points of a closed set to a query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub candidates: Vec<Point>,
    pub distance: f64,
    pub multivalued: bool,
    /// Distance gap between the minimizers and the closest non-minimizing
    /// competitor; infinite when no competitor exists.
    pub margin: f64,
}

impl ProjectionResult {
    /// The lowest-index candidate.
    pub fn first(&self) -> &Point {
        &self.candidates[0]
    }
}

/// Result of a brute-force nearest-neighbour query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub index: usize,
    pub distance: f64,
    /// Gap to the runner-up; zero on an exact tie, infinite with one point.
    pub margin: f64,
}

/// Euclidean distance from `q` to the set.
pub fn distance(spec: &ProjectorSpec, q: &Point) -> Result<f64> {
    q.check_dim(spec.dim())?;
    Ok(distance_unchecked(spec, q.coords()))
}

fn distance_unchecked(spec: &ProjectorSpec, q: &[f64]) -> f64 {
    match spec {
        ProjectorSpec::Sphere { center, radius } => (dist(q, center.coords()) - radius).abs(),
        ProjectorSpec::Ball { center, radius } => (dist(q, center.coords()) - radius).max(0.0),
        ProjectorSpec::Box { min, max } => {
            let residual: Vec<f64> = q
                .iter()
                .zip(min.coords().iter().zip(max.coords()))
                .map(|(x, (lo, hi))| x - x.clamp(*lo, *hi))
                .collect();
            norm(&residual)
        }
        ProjectorSpec::Halfspace { normal, offset } => (dot(normal.coords(), q) - offset).max(0.0),
        ProjectorSpec::Segment { a, b } => dist(q, &segment_point(a.coords(), b.coords(), q)),
        ProjectorSpec::Points { coords } => {
            coords.scan(q, 0.0, None).cands[0].1.sqrt()
        }
        ProjectorSpec::Union { members } => {
            members.iter().map(|m| distance_unchecked(m, q)).fold(f64::INFINITY, f64::min)
        }
    }
}

/// All nearest points of the set to `q`, up to `tie_tol` in distance.
///
/// Fails with [`Error::DegenerateProjection`] when a sphere that attains the
/// minimum is queried at its center.
pub fn project(spec: &ProjectorSpec, q: &Point, tie_tol: f64) -> Result<ProjectionResult> {
    if !(tie_tol > 0.0 && tie_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tie_tol must be positive, got {tie_tol}")));
    }
    q.check_dim(spec.dim())?;
    let scan = match member_scan(spec, q.coords(), tie_tol) {
        MemberScan::Proper(scan) => scan,
        MemberScan::Degenerate { .. } => return Err(Error::DegenerateProjection),
    };
    let distance = scan.cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    Ok(ProjectionResult {
        multivalued: scan.cands.len() > 1,
        margin: scan.runner - distance,
        distance,
        candidates: scan.cands.into_iter().map(|(p, _)| p).collect(),
    })
}

struct Scan {
    /// `(point, distance)` in member and index order.
    cands: Vec<(Point, f64)>,
    runner: f64,
}

enum MemberScan {
    Proper(Scan),
    Degenerate { distance: f64 },
}

fn single(p: Vec<f64>, q: &[f64]) -> MemberScan {
    let d = dist(q, &p);
    MemberScan::Proper(Scan { cands: vec![(Point::from_finite(p), d)], runner: f64::INFINITY })
}

fn radial(center: &[f64], radius: f64, q: &[f64]) -> Vec<f64> {
    let r = dist(q, center);
    center.iter().zip(q).map(|(c, x)| c + radius * (x - c) / r).collect()
}

fn segment_point(a: &[f64], b: &[f64], q: &[f64]) -> Vec<f64> {
    let ab: Vec<f64> = b.iter().zip(a).map(|(y, x)| y - x).collect();
    let len_sq = dot(&ab, &ab);
    if len_sq == 0.0 {
        return a.to_vec();
    }
    let aq: Vec<f64> = q.iter().zip(a).map(|(y, x)| y - x).collect();
    let t = (dot(&aq, &ab) / len_sq).clamp(0.0, 1.0);
    if t == 1.0 {
        return b.to_vec();
    }
    a.iter().zip(&ab).map(|(x, d)| x + t * d).collect()
}

fn cloud_scan(cloud: &PointCloud, q: &[f64], tie_tol: f64) -> Scan {
    let scan = cloud.scan(q, tie_tol, None);
    Scan {
        cands: scan.cands.iter().map(|&(i, d2)| (cloud.point(i), d2.sqrt())).collect(),
        runner: scan.runner_sq.sqrt(),
    }
}

fn member_scan(spec: &ProjectorSpec, q: &[f64], tie_tol: f64) -> MemberScan {
    match spec {
        ProjectorSpec::Sphere { center, radius } => {
            if dist(q, center.coords()) <= CENTER_TOL {
                MemberScan::Degenerate { distance: *radius }
            } else {
                single(radial(center.coords(), *radius, q), q)
            }
        }
        ProjectorSpec::Ball { center, radius } => {
            if dist(q, center.coords()) <= *radius {
                single(q.to_vec(), q)
            } else {
                single(radial(center.coords(), *radius, q), q)
            }
        }
        ProjectorSpec::Box { min, max } => single(
            q.iter()
                .zip(min.coords().iter().zip(max.coords()))
                .map(|(x, (lo, hi))| x.clamp(*lo, *hi))
                .collect(),
            q,
        ),
        ProjectorSpec::Halfspace { normal, offset } => {
            let excess = dot(normal.coords(), q) - offset;
            if excess <= 0.0 {
                single(q.to_vec(), q)
            } else {
                single(q.iter().zip(normal.coords()).map(|(x, n)| x - excess * n).collect(), q)
            }
        }
        ProjectorSpec::Segment { a, b } => single(segment_point(a.coords(), b.coords(), q), q),
        ProjectorSpec::Points { coords } => MemberScan::Proper(cloud_scan(coords, q, tie_tol)),
        ProjectorSpec::Union { members } => union_scan(members, q, tie_tol),
    }
}

fn union_scan(members: &[ProjectorSpec], q: &[f64], tie_tol: f64) -> MemberScan {
    let scans: Vec<MemberScan> = members.iter().map(|m| member_scan(m, q, tie_tol)).collect();
    let best = scans
        .iter()
        .map(|s| match s {
            MemberScan::Proper(scan) => scan.cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min),
            MemberScan::Degenerate { distance } => *distance,
        })
        .fold(f64::INFINITY, f64::min);
    let limit = best + tie_tol;

    let mut cands: Vec<(Point, f64)> = Vec::new();
    let mut runner = f64::INFINITY;
    for scan in scans {
        match scan {
            MemberScan::Degenerate { distance } if distance <= limit => {
                return MemberScan::Degenerate { distance: best };
            }
            MemberScan::Degenerate { distance } => runner = runner.min(distance),
            MemberScan::Proper(scan) => {
                runner = runner.min(scan.runner);
                for (p, d) in scan.cands {
                    if d > limit {
                        runner = runner.min(d);
                    } else if !cands.iter().any(|(c, _)| dist(c.coords(), p.coords()) < tie_tol) {
                        cands.push((p, d));
                    }
                }
            }
        }
    }
    MemberScan::Proper(Scan { cands, runner })
}

/// Membership test with an absolute tolerance, written directly from each
/// set's defining inequalities.
pub fn contains(spec: &ProjectorSpec, p: &Point, tol: f64) -> Result<bool> {
    p.check_dim(spec.dim())?;
    let x = p.coords();
    Ok(match spec {
        ProjectorSpec::Sphere { center, radius } => (dist(x, center.coords()) - radius).abs() <= tol,
        ProjectorSpec::Ball { center, radius } => dist(x, center.coords()) <= radius + tol,
        ProjectorSpec::Box { min, max } => x
            .iter()
            .zip(min.coords().iter().zip(max.coords()))
            .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol),
        ProjectorSpec::Halfspace { normal, offset } => dot(normal.coords(), x) <= offset + tol,
        ProjectorSpec::Segment { a, b } => {
            dist(x, a.coords()) + dist(x, b.coords()) <= dist(a.coords(), b.coords()) + tol
        }
        ProjectorSpec::Points { coords } => coords.iter().any(|c| dist(c, x) <= tol),
        ProjectorSpec::Union { members } => {
            let mut any = false;
            for m in members {
                any |= contains(m, p, tol)?;
            }
            any
        }
    })
}

/// Brute-force nearest neighbour of `q` among `points`, optionally ignoring
/// the point at index `exclude`. Exact ties go to the lowest index.
pub fn nearest_in_cloud(points: &PointCloud, q: &Point, exclude: Option<usize>) -> Result<Nearest> {
    q.check_dim(points.dim())?;
    let scan = points.scan(q.coords(), 0.0, exclude);
    let &(index, best_sq) = scan.cands.first().ok_or(Error::EmptyCloud)?;
    let distance = best_sq.sqrt();
    let margin = if scan.cands.len() > 1 { 0.0 } else { scan.runner_sq.sqrt() - distance };
    Ok(Nearest { index, distance, margin })
}
