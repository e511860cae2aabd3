//! The method of alternating projections: `a_n ∈ P_A(b_{n−1})`,
//! `b_n ∈ P_B(a_n)` from a start point `b_{−1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};
use crate::euclid::{project, Point, ProjectorSpec, DEFAULT_TIE_TOL};
use crate::sequence::max_circular_gap;

pub const DEFAULT_STOP_STEP: f64 = 1e-12;

/// What to do when a projection has several nearest points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// Take the first candidate and log the event.
    #[default]
    LowestIndex,
    /// Abort the run.
    Error,
}

/// Thresholds of the continuum classification. These are diagnostics; no
/// finite run can prove that a set of cluster points is a continuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuumHeuristic {
    /// Final steps must be below `step_factor · stop_step`.
    pub step_factor: f64,
    /// Tail spread must exceed `spread_factor · stop_step`.
    pub spread_factor: f64,
    /// Number of trailing `a` iterates inspected.
    pub tail: usize,
}

impl Default for ContinuumHeuristic {
    fn default() -> Self {
        ContinuumHeuristic { step_factor: 1e3, spread_factor: 100.0, tail: 100 }
    }
}

fn default_stop_step() -> f64 {
    DEFAULT_STOP_STEP
}

fn default_tie_tol() -> f64 {
    DEFAULT_TIE_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    #[serde(rename = "setA", alias = "set_a")]
    pub set_a: ProjectorSpec,
    #[serde(rename = "setB", alias = "set_b")]
    pub set_b: ProjectorSpec,
    /// `b_{−1}`.
    pub start: Point,
    pub max_iter: usize,
    /// Halt once `‖b_n − a_n‖` and `‖a_{n+1} − b_n‖` are both below this;
    /// zero disables the test.
    #[serde(default = "default_stop_step")]
    pub stop_step: f64,
    #[serde(default)]
    pub tie_policy: TiePolicy,
    #[serde(default = "default_tie_tol")]
    pub tie_tol: f64,
    #[serde(default)]
    pub heuristic: ContinuumHeuristic,
}

impl MapConfig {
    pub fn new(set_a: ProjectorSpec, set_b: ProjectorSpec, start: Point, max_iter: usize) -> Self {
        MapConfig {
            set_a,
            set_b,
            start,
            max_iter,
            stop_step: DEFAULT_STOP_STEP,
            tie_policy: TiePolicy::default(),
            tie_tol: DEFAULT_TIE_TOL,
            heuristic: ContinuumHeuristic::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.set_a.validate()?;
        self.set_b.validate()?;
        let dim = self.set_a.dim();
        if self.set_b.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.set_b.dim() });
        }
        if self.start.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.start.dim() });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.stop_step >= 0.0 && self.stop_step.is_finite()) {
            return Err(Error::InvalidArgument(format!("stop_step must be finite and >= 0, got {}", self.stop_step)));
        }
        if !(self.tie_tol > 0.0 && self.tie_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tie_tol must be positive, got {}", self.tie_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MultivaluedEvent {
    pub iteration: usize,
    pub side: Side,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictKind {
    ConvergedToPoint { limit: Point },
    /// Heuristic: steps became small but the tail does not cluster.
    ContinuumSuspected { ring_radius_estimate: f64, angular_spread: f64 },
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub kind: VerdictKind,
    pub iterations_used: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Steps {
    /// `‖b_n − a_n‖`.
    pub ab: Vec<f64>,
    /// `‖a_{n+1} − b_n‖`.
    pub ba: Vec<f64>,
}

/// A complete run. `a`, `b`, `steps.ab` and `steps.ba` all have one entry
/// per iteration; the last `steps.ba` entry comes from one look-ahead
/// projection of the final `b` onto `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapTrace {
    pub start: Point,
    pub a: Vec<Point>,
    pub b: Vec<Point>,
    pub steps: Steps,
    pub multivalued_events: Vec<MultivaluedEvent>,
    pub verdict: Verdict,
}

impl MapTrace {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

fn project_step(
    spec: &ProjectorSpec,
    q: &Point,
    config: &MapConfig,
    iteration: usize,
    side: Side,
    events: &mut Vec<MultivaluedEvent>,
) -> Result<Point> {
    let res = project(spec, q, config.tie_tol)
        .map_err(|e| Error::AtIteration { iteration, side, source: Box::new(e) })?;
    if res.multivalued {
        if config.tie_policy == TiePolicy::Error {
            return Err(Error::TieEncountered { iteration, side, count: res.candidates.len() });
        }
        events.push(MultivaluedEvent { iteration, side, candidates: res.candidates.len() });
    }
    Ok(res.candidates.into_iter().next().expect("projection has a candidate"))
}

/// Runs alternating projections as configured.
pub fn run(config: &MapConfig) -> Result<MapTrace> {
    config.validate()?;
    let mut events = Vec::new();
    let mut a = Vec::with_capacity(config.max_iter.min(1 << 20));
    let mut b = Vec::with_capacity(config.max_iter.min(1 << 20));
    let mut steps = Steps::default();

    let mut a_next = project_step(&config.set_a, &config.start, config, 0, Side::A, &mut events)?;
    let mut converged = false;
    for n in 0..config.max_iter {
        let a_n = a_next;
        let b_n = project_step(&config.set_b, &a_n, config, n, Side::B, &mut events)?;
        let a_following = project_step(&config.set_a, &b_n, config, n + 1, Side::A, &mut events)?;
        let ab = a_n.dist(&b_n);
        let ba = b_n.dist(&a_following);
        steps.ab.push(ab);
        steps.ba.push(ba);
        a.push(a_n);
        b.push(b_n);
        if config.stop_step > 0.0 && ab < config.stop_step && ba < config.stop_step {
            converged = true;
            break;
        }
        a_next = a_following;
    }

    let iterations_used = a.len();
    let kind = if converged {
        VerdictKind::ConvergedToPoint { limit: b.last().expect("at least one iteration").clone() }
    } else {
        classify_unconverged(&a, &steps, config)
    };
    // The look-ahead projection of the final b is not part of the run.
    events.retain(|e| e.iteration < iterations_used);
    Ok(MapTrace {
        start: config.start.clone(),
        a,
        b,
        steps,
        multivalued_events: events,
        verdict: Verdict { kind, iterations_used },
    })
}

fn classify_unconverged(a: &[Point], steps: &Steps, config: &MapConfig) -> VerdictKind {
    let h = config.heuristic;
    let last_step = steps.ab.last().copied().unwrap_or(f64::INFINITY).max(steps.ba.last().copied().unwrap_or(f64::INFINITY));
    let tail = &a[a.len().saturating_sub(h.tail.max(2))..];
    if tail.len() < 2 || !(last_step < h.step_factor * config.stop_step) {
        return VerdictKind::BudgetExhausted;
    }
    let spread = tail
        .iter()
        .enumerate()
        .flat_map(|(i, p)| tail[i + 1..].iter().map(move |q| p.dist(q)))
        .fold(0.0, f64::max);
    if spread > h.spread_factor * config.stop_step {
        let diag = diagnostics(tail);
        VerdictKind::ContinuumSuspected {
            ring_radius_estimate: diag.radius_mean,
            angular_spread: std::f64::consts::TAU - diag.angular_gap_max,
        }
    } else {
        VerdictKind::BudgetExhausted
    }
}

/// Shape of the trailing `a` iterates, measured about the origin in the
/// plane of the first two coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterDiagnostics {
    pub radius_mean: f64,
    pub radius_dev: f64,
    pub angular_gap_max: f64,
}

fn planar_angle(p: &Point) -> f64 {
    match p.coords() {
        [x] => {
            if *x < 0.0 {
                std::f64::consts::PI
            } else {
                0.0
            }
        }
        [x, y, ..] => y.atan2(*x),
        [] => 0.0,
    }
}

fn diagnostics(points: &[Point]) -> ClusterDiagnostics {
    let n = points.len() as f64;
    let radii: Vec<f64> = points.iter().map(Point::norm).collect();
    let radius_mean = radii.iter().sum::<f64>() / n;
    let radius_dev = (radii.iter().map(|r| (r - radius_mean).powi(2)).sum::<f64>() / n).sqrt();
    ClusterDiagnostics { radius_mean, radius_dev, angular_gap_max: max_circular_gap(points.iter().map(planar_angle)) }
}

/// Radius and angular coverage of the last `tail` iterates `a_n`.
pub fn cluster_diagnostics(trace: &MapTrace, tail: usize) -> Result<ClusterDiagnostics> {
    if tail < 2 || tail > trace.a.len() {
        return Err(Error::InvalidArgument(format!("tail must lie in [2, {}], got {tail}", trace.a.len())));
    }
    Ok(diagnostics(&trace.a[trace.a.len() - tail..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn identical_boxes_converge_after_one_iteration() {
        let bx = ProjectorSpec::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
        let trace = run(&MapConfig::new(bx.clone(), bx, p(&[3.0, 0.5]), 50)).unwrap();
        assert_eq!(trace.a, vec![p(&[1.0, 0.5])]);
        assert_eq!(trace.b, vec![p(&[1.0, 0.5])]);
        assert_eq!(trace.verdict.iterations_used, 1);
        assert_eq!(trace.verdict.kind, VerdictKind::ConvergedToPoint { limit: p(&[1.0, 0.5]) });
    }

    #[test]
    fn two_boxes_meet_on_shared_edge() {
        let a = ProjectorSpec::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
        let b = ProjectorSpec::cuboid(p(&[1.0, 0.0]), p(&[2.0, 1.0])).unwrap();
        let trace = run(&MapConfig::new(a, b, p(&[3.0, 0.5]), 10)).unwrap();
        // clamp(3, 0, 1) = 1, then clamp(1, 1, 2) = 1
        assert_eq!(trace.verdict.kind, VerdictKind::ConvergedToPoint { limit: p(&[1.0, 0.5]) });
    }

    #[test]
    fn tie_policies() {
        let a = ProjectorSpec::points(vec![p(&[-1.0, 0.0]), p(&[1.0, 0.0])]).unwrap();
        let b = ProjectorSpec::cuboid(p(&[-1.0, -1.0]), p(&[1.0, 1.0])).unwrap();
        let mut cfg = MapConfig::new(a, b, p(&[0.0, 3.0]), 5);
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.a[0], p(&[-1.0, 0.0]));
        assert_eq!(trace.multivalued_events, vec![MultivaluedEvent { iteration: 0, side: Side::A, candidates: 2 }]);
        cfg.tie_policy = TiePolicy::Error;
        assert_eq!(run(&cfg), Err(Error::TieEncountered { iteration: 0, side: Side::A, count: 2 }));
    }

    #[test]
    fn degenerate_projection_reports_iteration() {
        let s = ProjectorSpec::sphere(p(&[0.0, 0.0]), 1.0).unwrap();
        let b = ProjectorSpec::points(vec![p(&[0.0, 0.0])]).unwrap();
        let err = run(&MapConfig::new(s, b, p(&[2.0, 0.0]), 5)).unwrap_err();
        assert_eq!(
            err,
            Error::AtIteration { iteration: 1, side: Side::A, source: Box::new(Error::DegenerateProjection) }
        );
    }

    #[test]
    fn config_validation() {
        let s = ProjectorSpec::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let s3 = ProjectorSpec::ball(p(&[0.0, 0.0, 0.0]), 1.0).unwrap();
        assert!(run(&MapConfig::new(s.clone(), s3, p(&[1.0, 1.0]), 5)).is_err());
        assert!(run(&MapConfig::new(s.clone(), s.clone(), p(&[1.0]), 5)).is_err());
        assert!(run(&MapConfig::new(s.clone(), s, p(&[1.0, 1.0]), 0)).is_err());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: MapConfig = serde_json::from_str(
            r#"{"setA":{"type":"ball","center":[0,0],"radius":1},
                "setB":{"type":"halfspace","normal":[-1,0],"offset":-1},
                "start":[5,5],"max_iter":10}"#,
        )
        .unwrap();
        assert_eq!(cfg.stop_step, DEFAULT_STOP_STEP);
        assert_eq!(cfg.tie_policy, TiePolicy::LowestIndex);
        assert_eq!(cfg.tie_tol, DEFAULT_TIE_TOL);
        let err = serde_json::from_str::<MapConfig>(r#"{"setA":{"type":"ball","center":[0,0],"radius":1},"start":[5,5],"max_iter":10}"#);
        assert!(err.is_err());
    }

    #[test]
    fn diagnostics_on_coincident_tail() {
        let bx = ProjectorSpec::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap();
        let mut cfg = MapConfig::new(bx.clone(), bx, p(&[3.0, 0.5]), 5);
        cfg.stop_step = 0.0;
        let trace = run(&cfg).unwrap();
        assert_eq!(trace.len(), 5);
        assert_eq!(trace.verdict.kind, VerdictKind::BudgetExhausted);
        let d = cluster_diagnostics(&trace, 5).unwrap();
        assert_eq!(d.angular_gap_max, std::f64::consts::TAU);
        assert_eq!(d.radius_dev, 0.0);
        assert!(cluster_diagnostics(&trace, 1).is_err());
        assert!(cluster_diagnostics(&trace, 6).is_err());
    }

    #[test]
    fn diagnostics_on_two_distinct_points() {
        let d = diagnostics(&[p(&[1.0, 0.0]), p(&[0.0, 2.0])]);
        assert!((d.angular_gap_max - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(d.radius_mean, 1.5);
        assert_eq!(d.radius_dev, 0.5);
    }
}
