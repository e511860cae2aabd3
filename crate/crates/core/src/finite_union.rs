//! Alternating projections between finite unions of closed convex sets.
//!
//! Whenever both iterate sequences stay bounded and the gaps `b_n − a_n`,
//! `a_{n+1} − b_n` vanish, the iterates must converge to a single point of
//! `A ∩ B`. [`check_theorem`] tests the premises on a finite run and only
//! then asserts the conclusion, so an oscillating run is reported as
//! [`Status::HypothesesNotMet`], never as a failure.

use std::io::{self, Write};
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclid::{distance, Point, ProjectorSpec};
use crate::map_driver::{run, MapConfig, MapTrace, TiePolicy};
use crate::numfmt::to_json_string;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200_000;
/// Extra iterations run past the stopping point; all of them must stay
/// within `tol` of the limit.
pub const CAUCHY_TAIL: usize = 10;
/// Allowed drift of the distance-to-limit chain once it has started.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// One randomized instance. Every member contains `planted`, so
/// `A ∩ B` is never empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnionScenario {
    pub a_members: Vec<ProjectorSpec>,
    pub b_members: Vec<ProjectorSpec>,
    pub start: Point,
    pub seed: u64,
    pub max_iter: usize,
    pub planted: Point,
}

impl UnionScenario {
    pub fn validate(&self) -> Result<()> {
        let dim = self.start.dim();
        if self.a_members.is_empty() || self.b_members.is_empty() {
            return Err(Error::InvalidArgument("each side needs at least one member".into()));
        }
        for m in self.a_members.iter().chain(&self.b_members) {
            m.validate()?;
            if !m.is_convex() {
                return Err(Error::InvalidSpec(format!("union member is not convex: {m:?}")));
            }
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
            }
        }
        self.planted.check_dim(dim)
    }

    pub fn set_a(&self) -> Result<ProjectorSpec> {
        ProjectorSpec::union(self.a_members.clone())
    }

    pub fn set_b(&self) -> Result<ProjectorSpec> {
        ProjectorSpec::union(self.b_members.clone())
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn convex_member_containing(rng: &mut ChaCha8Rng, c: &[f64]) -> Result<ProjectorSpec> {
    let dim = c.len();
    match rng.gen_range(0..3) {
        0 => {
            let lo = c.iter().map(|x| x - rng.gen_range(0.0..1.0)).collect();
            let hi = c.iter().map(|x| x + rng.gen_range(0.0..1.0)).collect();
            ProjectorSpec::cuboid(Point::new(lo)?, Point::new(hi)?)
        }
        1 => {
            let radius = rng.gen_range(0.3..1.5);
            let shift = rng.gen_range(0.5..1.0) * radius;
            let u = unit_vector(rng, dim);
            let center = c.iter().zip(&u).map(|(x, d)| x + shift * d).collect();
            ProjectorSpec::ball(Point::new(center)?, radius)
        }
        _ => {
            let normal = unit_vector(rng, dim);
            let offset = normal.iter().zip(c).map(|(n, x)| n * x).sum::<f64>() + rng.gen_range(0.0..0.2);
            ProjectorSpec::halfspace(Point::new(normal)?, offset)
        }
    }
}

/// Deterministic random scenario: a planted point uniform in `[−1, 1]^dim`,
/// `members_per_side` boxes, balls or halfspaces per side each containing
/// it, and a start within distance 10 of it.
pub fn generate_scenario(seed: u64, dim: usize, members_per_side: usize) -> Result<UnionScenario> {
    if !(2..=4).contains(&dim) {
        return Err(Error::InvalidArgument(format!("dim must lie in 2..=4, got {dim}")));
    }
    if !(1..=4).contains(&members_per_side) {
        return Err(Error::InvalidArgument(format!("members per side must lie in 1..=4, got {members_per_side}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let a_members = (0..members_per_side)
        .map(|_| convex_member_containing(&mut rng, &planted))
        .collect::<Result<Vec<_>>>()?;
    let b_members = (0..members_per_side)
        .map(|_| convex_member_containing(&mut rng, &planted))
        .collect::<Result<Vec<_>>>()?;
    let u = unit_vector(&mut rng, dim);
    let r = rng.gen_range(0.0..10.0);
    let start = planted.iter().zip(&u).map(|(x, d)| x + r * d).collect();
    Ok(UnionScenario {
        a_members,
        b_members,
        start: Point::new(start)?,
        seed,
        max_iter: DEFAULT_MAX_ITER,
        planted: Point::new(planted)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    HypothesesNotMet,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub seed: u64,
    pub status: Status,
    pub converged: bool,
    pub limit: Option<Point>,
    pub limit_in_intersection: bool,
    pub gaps_vanished: bool,
    pub bounded: bool,
    pub iterations: usize,
    /// `max(‖b_N − a_N‖, ‖a_{N+1} − b_N‖)` at the end of the run.
    pub final_gap: f64,
    /// Largest pairwise distance among the [`CAUCHY_TAIL`] continuation
    /// iterates; `NaN` when the hypotheses fail.
    pub tail_diameter: f64,
    /// Whether `‖a_m − c‖ ≥ ‖b_m − c‖ ≥ ‖a_{m+1} − c‖ ≥ …` held from the first
    /// iterate closer to the limit `c` than half its distance to every
    /// member missing `c`; `None` when not applicable.
    pub monotone_after_entry: Option<bool>,
}

fn members_min_distance(members: &[ProjectorSpec], p: &Point) -> Result<f64> {
    members.iter().map(|m| distance(m, p)).try_fold(f64::INFINITY, |acc, d| Ok(acc.min(d?)))
}

/// Runs alternating projections on the scenario and grades the outcome.
pub fn check_theorem(scenario: &UnionScenario, tol: f64) -> Result<ConvergenceVerdict> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    scenario.validate()?;
    let mut cfg = MapConfig::new(scenario.set_a()?, scenario.set_b()?, scenario.start.clone(), scenario.max_iter);
    cfg.stop_step = tol * 1e-3;
    cfg.tie_policy = TiePolicy::LowestIndex;
    let trace = run(&cfg)?;
    grade(scenario, &trace, &cfg, tol)
}

fn grade(scenario: &UnionScenario, trace: &MapTrace, cfg: &MapConfig, tol: f64) -> Result<ConvergenceVerdict> {
    let scale = 1f64.max(scenario.start.norm()).max(scenario.planted.norm());
    let bounded = trace.a.iter().chain(&trace.b).all(|p| p.norm().is_finite() && p.norm() <= 10.0 * scale);
    let final_gap = trace.steps.ab.last().copied().unwrap_or(f64::INFINITY).max(trace.steps.ba.last().copied().unwrap_or(f64::INFINITY));
    let gaps_vanished = final_gap < tol;

    let mut verdict = ConvergenceVerdict {
        seed: scenario.seed,
        status: Status::HypothesesNotMet,
        converged: false,
        limit: None,
        limit_in_intersection: false,
        gaps_vanished,
        bounded,
        iterations: trace.len(),
        final_gap,
        tail_diameter: f64::NAN,
        monotone_after_entry: None,
    };
    if !(bounded && gaps_vanished) {
        return Ok(verdict);
    }

    let limit = trace.b.last().expect("nonempty trace").clone();
    // Keep iterating from where the run stopped.
    let mut more = cfg.clone();
    more.start = limit.clone();
    more.max_iter = CAUCHY_TAIL;
    more.stop_step = 0.0;
    let cont = run(&more)?;
    let tail: Vec<&Point> = cont.a.iter().chain(&cont.b).collect();
    let tail_diameter = tail
        .iter()
        .enumerate()
        .flat_map(|(i, p)| tail[i + 1..].iter().map(move |q| p.dist(q)))
        .fold(0.0, f64::max);
    verdict.tail_diameter = tail_diameter;
    let cauchy = tail.iter().all(|p| p.dist(&limit) <= tol);
    let in_a = members_min_distance(&scenario.a_members, &limit)? <= tol;
    let in_b = members_min_distance(&scenario.b_members, &limit)? <= tol;
    verdict.converged = cauchy;
    verdict.limit_in_intersection = in_a && in_b;
    verdict.monotone_after_entry = monotone_after_entry(scenario, trace, &limit, tol)?;
    verdict.limit = Some(limit);
    let ok = verdict.converged
        && verdict.limit_in_intersection
        && tail_diameter <= 10.0 * tol
        && verdict.monotone_after_entry != Some(false);
    verdict.status = if ok { Status::Pass } else { Status::Fail };
    Ok(verdict)
}

fn monotone_after_entry(scenario: &UnionScenario, trace: &MapTrace, c: &Point, tol: f64) -> Result<Option<bool>> {
    let mut delta: f64 = 1.0;
    for m in scenario.a_members.iter().chain(&scenario.b_members) {
        let d = distance(m, c)?;
        if d > tol {
            delta = delta.min(d);
        }
    }
    // interleave a_0, b_0, a_1, b_1, …
    let dists: Vec<f64> = trace.a.iter().zip(&trace.b).flat_map(|(a, b)| [a.dist(c), b.dist(c)]).collect();
    let Some(entry) = dists.iter().step_by(2).position(|&d| d < delta / 2.0) else {
        return Ok(None);
    };
    Ok(Some(dists[2 * entry..].windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK)))
}

/// Counts over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct BatchSummary {
    pub pass: usize,
    pub hypotheses_not_met: usize,
    pub fail: usize,
}

impl BatchSummary {
    pub fn tally(verdicts: &[ConvergenceVerdict]) -> Self {
        let mut s = BatchSummary::default();
        for v in verdicts {
            match v.status {
                Status::Pass => s.pass += 1,
                Status::HypothesesNotMet => s.hypotheses_not_met += 1,
                Status::Fail => s.fail += 1,
            }
        }
        s
    }
}

/// Checks one scenario per seed, in seed order.
pub fn run_batch(
    seeds: Range<u64>,
    mut shape: impl FnMut(u64) -> (usize, usize),
    tol: f64,
    max_iter: usize,
) -> Result<Vec<ConvergenceVerdict>> {
    seeds
        .map(|seed| {
            let (dim, members) = shape(seed);
            let mut sc = generate_scenario(seed, dim, members)?;
            sc.max_iter = max_iter;
            check_theorem(&sc, tol)
        })
        .collect()
}

/// One JSON object per line.
pub fn write_jsonl<W: Write>(verdicts: &[ConvergenceVerdict], mut w: W) -> io::Result<()> {
    for v in verdicts {
        writeln!(w, "{}", to_json_string(v).map_err(io::Error::other)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn scenario_is_reproducible_and_planted() {
        let s1 = generate_scenario(42, 3, 4).unwrap();
        let s2 = generate_scenario(42, 3, 4).unwrap();
        assert_eq!(to_json_string(&s1).unwrap(), to_json_string(&s2).unwrap());
        assert_ne!(s1, generate_scenario(43, 3, 4).unwrap());
        for m in s1.a_members.iter().chain(&s1.b_members) {
            assert!(m.is_convex());
            assert_eq!(distance(m, &s1.planted).unwrap(), 0.0);
        }
        assert!(s1.start.dist(&s1.planted) <= 10.0);
        assert!(s1.planted.coords().iter().all(|x| x.abs() <= 1.0));
    }

    #[test]
    fn scenario_ranges() {
        assert!(generate_scenario(0, 1, 2).is_err());
        assert!(generate_scenario(0, 5, 2).is_err());
        assert!(generate_scenario(0, 2, 0).is_err());
        assert!(generate_scenario(0, 2, 5).is_err());
    }

    #[test]
    fn adjacent_boxes() {
        let sc = UnionScenario {
            a_members: vec![ProjectorSpec::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap()],
            b_members: vec![ProjectorSpec::cuboid(p(&[1.0, 0.0]), p(&[2.0, 1.0])).unwrap()],
            start: p(&[3.0, 0.5]),
            seed: 0,
            max_iter: 100,
            planted: p(&[1.0, 0.5]),
        };
        let v = check_theorem(&sc, DEFAULT_TOL).unwrap();
        assert_eq!(v.status, Status::Pass);
        assert_eq!(v.limit, Some(p(&[1.0, 0.5])));
    }

    #[test]
    fn persistent_gap_is_not_a_failure() {
        // A and B are a unit apart; the iterates settle but never meet.
        let sc = UnionScenario {
            a_members: vec![
                ProjectorSpec::cuboid(p(&[0.0, 0.0]), p(&[1.0, 1.0])).unwrap(),
                ProjectorSpec::ball(p(&[0.5, 5.0]), 0.5).unwrap(),
            ],
            b_members: vec![ProjectorSpec::cuboid(p(&[2.0, 0.0]), p(&[3.0, 1.0])).unwrap()],
            start: p(&[-4.0, 0.25]),
            seed: 0,
            max_iter: 1000,
            planted: p(&[1.5, 0.5]),
        };
        let v = check_theorem(&sc, DEFAULT_TOL).unwrap();
        assert_eq!(v.status, Status::HypothesesNotMet);
        assert!(v.bounded && !v.gaps_vanished);
        assert_eq!(v.final_gap, 1.0);
        assert_eq!(v.limit, None);
    }

    #[test]
    fn batch_jsonl_one_line_per_seed() {
        let v = run_batch(0..20, |s| (2 + (s % 3) as usize, 1 + (s % 4) as usize), DEFAULT_TOL, 10_000).unwrap();
        assert_eq!(BatchSummary::tally(&v).fail, 0);
        let mut buf = Vec::new();
        write_jsonl(&v, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 20);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["seed"], 0);
    }

    #[test]
    fn rejects_nonconvex_members() {
        let mut sc = generate_scenario(1, 2, 1).unwrap();
        sc.a_members.push(ProjectorSpec::sphere(p(&[0.0, 0.0]), 1.0).unwrap());
        assert!(check_theorem(&sc, DEFAULT_TOL).is_err());
    }
}
