//! Fixtures shared by the benchmarks.

use altproj::counterexample::{self, CounterexampleSets, Variant};
use altproj::{Point, ProjectorSpec};

/// Counterexample sets over `horizon` sequence points.
pub fn spiral_sets(horizon: usize) -> CounterexampleSets {
    counterexample::build(horizon, Variant::Sphere).expect("valid horizon")
}

/// A union of `k` unit balls spread along the first axis in `dim` dimensions.
pub fn ball_row(k: usize, dim: usize) -> ProjectorSpec {
    let members = (0..k)
        .map(|i| {
            let mut c = vec![0.0; dim];
            c[0] = 3.0 * i as f64;
            ProjectorSpec::ball(Point::new(c).expect("finite"), 1.0).expect("positive radius")
        })
        .collect();
    ProjectorSpec::union(members).expect("nonempty")
}
