//! The sets `A = {x_0, x_2, x_4, …} ∪ S` and `B = {x_1, x_3, …} ∪ S` built
//! from a finite prefix of the spiral sequence, where `S` is the unit
//! circle (or, in the disk variant, the closed unit disk).
//!
//! Started at `b_{−1} = x_0`, alternating projections between them visit
//! `x_0, x_1, x_2, …` in order, so the iterates accumulate on all of `S`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclid::{Point, ProjectorSpec, DEFAULT_TIE_TOL};
use crate::map_driver::{run, MapConfig, MapTrace};
use crate::sequence::{generate, SequenceReport};

/// Indices kept free at the end of the prefix: the last projections of a
/// run must not see the truncation.
pub const EDGE_GUARD: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Union with the unit circle.
    Sphere,
    /// Union with the closed unit disk; every member is then convex.
    Disk,
}

#[derive(Debug, Clone)]
pub struct CounterexampleSets {
    pub a: ProjectorSpec,
    pub b: ProjectorSpec,
    /// Number of sequence points used, `x_0 … x_{horizon−1}`.
    pub horizon: usize,
    pub variant: Variant,
    sequence: SequenceReport,
    index_of: HashMap<[u64; 2], usize>,
}

fn key(p: &Point) -> [u64; 2] {
    let c = p.coords();
    [c[0].to_bits(), c[1].to_bits()]
}

/// Builds the truncated sets from the first `horizon` sequence points.
pub fn build(horizon: usize, variant: Variant) -> Result<CounterexampleSets> {
    if horizon < 2 {
        return Err(Error::InvalidArgument(format!("horizon must be at least 2, got {horizon}")));
    }
    build_from(generate(horizon)?, variant)
}

/// Same as [`build`], reusing an already generated sequence.
pub fn build_from(sequence: SequenceReport, variant: Variant) -> Result<CounterexampleSets> {
    let horizon = sequence.len();
    if horizon < 2 {
        return Err(Error::InvalidArgument(format!("horizon must be at least 2, got {horizon}")));
    }
    let parity = |odd: usize| -> Vec<Point> {
        sequence.records.iter().filter(|r| r.n % 2 == odd).map(|r| r.x.clone()).collect()
    };
    let circle = |v: Variant| -> Result<ProjectorSpec> {
        match v {
            Variant::Sphere => ProjectorSpec::sphere(Point::origin(2), 1.0),
            Variant::Disk => ProjectorSpec::ball(Point::origin(2), 1.0),
        }
    };
    let a = ProjectorSpec::union(vec![ProjectorSpec::points(parity(0))?, circle(variant)?])?;
    let b = ProjectorSpec::union(vec![ProjectorSpec::points(parity(1))?, circle(variant)?])?;
    let index_of = sequence.records.iter().map(|r| (key(&r.x), r.n)).collect();
    Ok(CounterexampleSets { a, b, horizon, variant, sequence, index_of })
}

/// How a run from an arbitrary start behaved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StartOutcome {
    /// `a_0 ∈ S` and every iterate equals `a_0`.
    Constant,
    /// `a_n = x_{2(m+n)}` and `b_n = x_{2(m+n)+1}` throughout.
    JoinsTail { m: usize, pairs: usize },
    /// The tail would run into the truncation before one full pair.
    TruncationLimited { first_index: usize },
    /// Anything else, e.g. a start inside the disk for the disk variant.
    Other,
}

impl CounterexampleSets {
    pub fn sequence(&self) -> &SequenceReport {
        &self.sequence
    }

    /// Position of `p` in the sequence, if it is exactly one of the `x_n`.
    pub fn index_of(&self, p: &Point) -> Option<usize> {
        if p.dim() != 2 {
            return None;
        }
        self.index_of.get(&key(p)).copied()
    }

    /// Distance tolerance for ties: a hundredth of the smallest gap between
    /// consecutive step lengths, which is the closest any losing point of
    /// the orbit comes to the winner. Capped at [`DEFAULT_TIE_TOL`].
    pub fn tie_tol(&self) -> f64 {
        let gap = self
            .sequence
            .records
            .windows(2)
            .map(|w| w[0].eps - w[1].eps)
            .fold(f64::INFINITY, f64::min);
        (0.01 * gap).min(DEFAULT_TIE_TOL)
    }

    /// A hundredth of the shortest step the truncated sets can produce.
    pub fn stop_step(&self) -> f64 {
        0.01 * self.sequence.records.last().expect("horizon >= 2").eps
    }

    /// Largest number of pairs a run started at `x_{2m}` may take.
    pub fn max_pairs_from(&self, m: usize) -> usize {
        // the run (with its look-ahead) touches x_{2(m+pairs)}
        (self.horizon.saturating_sub(1 + EDGE_GUARD) / 2).saturating_sub(m)
    }

    /// Alternating-projections configuration over these sets.
    pub fn config(&self, start: Point, n_pairs: usize) -> MapConfig {
        let mut cfg = MapConfig::new(self.a.clone(), self.b.clone(), start, n_pairs);
        cfg.stop_step = self.stop_step();
        cfg.tie_tol = self.tie_tol();
        cfg
    }

    /// Runs from `b_{−1} = x_0` and checks `a_n = x_{2n}`, `b_n = x_{2n+1}`
    /// index for index.
    pub fn run_corollary(&self, n_pairs: usize) -> Result<MapTrace> {
        if n_pairs == 0 || n_pairs > self.max_pairs_from(0) {
            return Err(Error::InvalidArgument(format!(
                "{n_pairs} pairs do not fit a horizon of {} (at most {})",
                self.horizon,
                self.max_pairs_from(0)
            )));
        }
        let x = |i: usize| &self.sequence.records[i].x;
        let trace = run(&self.config(x(0).clone(), n_pairs))?;
        if trace.len() != n_pairs {
            return Err(Error::CorollaryViolated(trace.len()));
        }
        for (n, (a, b)) in trace.a.iter().zip(&trace.b).enumerate() {
            if a != x(2 * n) || b != x(2 * n + 1) {
                return Err(Error::CorollaryViolated(n));
            }
        }
        Ok(trace)
    }

    /// Runs up to `n_pairs` pairs from an arbitrary start and classifies
    /// the result.
    pub fn classify_start(&self, start: &Point, n_pairs: usize) -> Result<(StartOutcome, MapTrace)> {
        let first = run(&self.config(start.clone(), 1))?;
        let a0 = first.a[0].clone();
        let pairs = match self.index_of(&a0) {
            Some(i) if i % 2 == 0 => self.max_pairs_from(i / 2).min(n_pairs),
            Some(i) => return Ok((StartOutcome::TruncationLimited { first_index: i }, first)),
            None => n_pairs,
        };
        if pairs == 0 {
            let first_index = self.index_of(&a0).unwrap_or(0);
            return Ok((StartOutcome::TruncationLimited { first_index }, first));
        }
        let trace = run(&self.config(start.clone(), pairs))?;
        let outcome = match self.index_of(&a0) {
            Some(i) => {
                let m = i / 2;
                let on_tail = trace.a.iter().zip(&trace.b).enumerate().all(|(n, (a, b))| {
                    self.index_of(a) == Some(2 * (m + n)) && self.index_of(b) == Some(2 * (m + n) + 1)
                });
                if on_tail {
                    StartOutcome::JoinsTail { m, pairs: trace.len() }
                } else {
                    StartOutcome::Other
                }
            }
            None => {
                let on_circle = (a0.norm() - 1.0).abs() <= 1e-12;
                let constant = trace.a.iter().chain(&trace.b).all(|p| p.dist(&a0) <= 1e-15);
                if on_circle && constant {
                    StartOutcome::Constant
                } else {
                    StartOutcome::Other
                }
            }
        };
        Ok((outcome, trace))
    }
}
