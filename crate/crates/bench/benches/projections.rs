use std::hint::black_box;

use altproj::euclid::{project, DEFAULT_TIE_TOL};
use altproj::finite_union::{check_theorem, generate_scenario, DEFAULT_TOL};
use altproj::sequence::generate;
use altproj::spiral::{next_alpha, DEFAULT_ANGLE_TOL};
use altproj::{Angle, Point};
use altproj_bench::{ball_row, spiral_sets};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("next_alpha");
    for alpha in [0.0, 5.0, 20.0] {
        let a = Angle::new(alpha).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(alpha), &a, |b, &a| {
            b.iter(|| next_alpha(black_box(a), DEFAULT_ANGLE_TOL).unwrap())
        });
    }
    g.finish();
    c.bench_function("generate_10000", |b| b.iter(|| generate(black_box(10_000)).unwrap()));
}

fn projection(c: &mut Criterion) {
    let mut g = c.benchmark_group("project_spiral_union");
    for horizon in [1_000, 10_000, 100_000] {
        let sets = spiral_sets(horizon);
        let q = sets.sequence().records[horizon / 2].x.clone();
        let tol = sets.tie_tol();
        g.bench_with_input(BenchmarkId::from_parameter(horizon), &q, |b, q| {
            b.iter(|| project(&sets.a, black_box(q), tol).unwrap())
        });
    }
    g.finish();

    let row = ball_row(8, 3);
    let q = Point::new(vec![10.0, 4.0, -1.0]).unwrap();
    c.bench_function("project_ball_union_8x3", |b| b.iter(|| project(&row, black_box(&q), DEFAULT_TIE_TOL).unwrap()));
}

fn runs(c: &mut Criterion) {
    let sets = spiral_sets(2000);
    c.bench_function("orbit_500_pairs", |b| b.iter(|| sets.run_corollary(black_box(500)).unwrap()));
    let sc = generate_scenario(7, 3, 4).unwrap();
    c.bench_function("finite_union_check", |b| b.iter(|| check_theorem(black_box(&sc), DEFAULT_TOL).unwrap()));
}

criterion_group!(benches, solver, projection, runs);
criterion_main!(benches);
