use altproj::counterexample::{build, build_from, StartOutcome, Variant};
use altproj::euclid::{project, DEFAULT_TIE_TOL};
use altproj::map_driver::{cluster_diagnostics, run, MapConfig, TiePolicy, VerdictKind};
use altproj::sequence::generate;
use altproj::{Point, ProjectorSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(x: f64, y: f64) -> Point {
    Point::xy(x, y).unwrap()
}

#[test]
fn ball_meets_tangent_halfspace() {
    // {x ≥ 1} touches the unit disk only at (1, 0); the angle of a_n decays
    // like n^{-1/2} and both steps like 1/(2n), so a 1e-6 stop leaves the
    // limit about 1.4e-3 short.
    let a = ProjectorSpec::ball(Point::origin(2), 1.0).unwrap();
    let b = ProjectorSpec::halfspace(p(-1.0, 0.0), -1.0).unwrap();
    let mut cfg = MapConfig::new(a, b, p(5.0, 5.0), 2_000_000);
    cfg.stop_step = 1e-6;
    let trace = run(&cfg).unwrap();
    let VerdictKind::ConvergedToPoint { limit } = &trace.verdict.kind else {
        panic!("{:?}", trace.verdict)
    };

    // oracle: the point of the circle nearest the halfspace, by grid search
    let oracle = (0..1_000_000)
        .map(|i| std::f64::consts::TAU * i as f64 / 1e6)
        .map(|t| (1.0 - t.cos(), t))
        .fold((f64::INFINITY, 0.0), |best, c| if c.0 < best.0 { c } else { best })
        .1;
    let target = p(oracle.cos(), oracle.sin());
    assert!(limit.dist(&target) < 2e-3, "{limit:?}");

    // Fejér monotonicity towards the common point
    let c = p(1.0, 0.0);
    for w in trace.a.windows(2) {
        assert!(w[1].dist(&c) <= w[0].dist(&c) + 1e-9);
    }
}

#[test]
fn adjacent_boxes_meet_on_the_shared_face() {
    let a = ProjectorSpec::cuboid(p(0.0, 0.0), p(1.0, 1.0)).unwrap();
    let b = ProjectorSpec::cuboid(p(1.0, 0.0), p(2.0, 1.0)).unwrap();
    let trace = run(&MapConfig::new(a.clone(), b, p(3.0, 0.5), 100)).unwrap();
    // clamp arithmetic: P_A(3, 0.5) = (1, 0.5), already in B
    assert_eq!(trace.a[0], p(1.0, 0.5));
    assert_eq!(trace.verdict.kind, VerdictKind::ConvergedToPoint { limit: p(1.0, 0.5) });

    let same = run(&MapConfig::new(a.clone(), a, p(3.0, 0.5), 100)).unwrap();
    assert_eq!(same.verdict.iterations_used, 1);
    assert_eq!(same.b[0], p(1.0, 0.5));
}

#[test]
fn fejer_on_random_convex_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let c = p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let r = rng.gen_range(0.5..2.0);
        let a = ProjectorSpec::ball(p(c.coords()[0] + 0.9 * r, c.coords()[1]), r).unwrap();
        let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = p(angle.cos(), angle.sin());
        let off = n.coords()[0] * c.coords()[0] + n.coords()[1] * c.coords()[1] + rng.gen_range(0.0..0.3);
        let b = ProjectorSpec::halfspace(n, off).unwrap();
        let start = p(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
        let trace = run(&MapConfig::new(a, b, start, 2000)).unwrap();
        for (i, w) in trace.a.windows(2).enumerate() {
            assert!(w[1].dist(&c) <= trace.b[i].dist(&c) + 1e-9);
            assert!(trace.b[i].dist(&c) <= w[0].dist(&c) + 1e-9);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let sets = build(600, Variant::Sphere).unwrap();
    let cfg = sets.config(p(2.5, -1.0), 250);
    let t1 = altproj::numfmt::to_json_string(&run(&cfg).unwrap()).unwrap();
    let t2 = altproj::numfmt::to_json_string(&run(&cfg).unwrap()).unwrap();
    assert_eq!(t1, t2);
}

#[test]
fn orbit_steps_are_the_prescribed_lengths() {
    let sets = build(2000, Variant::Sphere).unwrap();
    let trace = sets.run_corollary(500).unwrap();
    let recs = &sets.sequence().records;
    for n in 0..trace.len() {
        assert!((trace.steps.ab[n] - recs[2 * n].eps).abs() <= 1e-10);
        assert!((trace.steps.ba[n] - recs[2 * n + 1].eps).abs() <= 1e-10);
        if n > 0 {
            assert!(trace.steps.ab[n] < trace.steps.ba[n - 1]);
        }
        assert!(trace.steps.ba[n] < trace.steps.ab[n]);
        let gap = (trace.a[n].norm() - 1.0).abs();
        assert!((gap - (-recs[2 * n].alpha.radians()).exp()).abs() <= 1e-12);
    }
    assert!(trace.multivalued_events.is_empty());
    match trace.verdict.kind {
        VerdictKind::ContinuumSuspected { ring_radius_estimate, .. } => {
            assert!((ring_radius_estimate - 1.0).abs() < 1e-2)
        }
        ref k => panic!("{k:?}"),
    }
    let diag = cluster_diagnostics(&trace, 500).unwrap();
    let band = (-recs[0].alpha.radians()).exp();
    assert!((diag.radius_mean - 1.0).abs() <= band);
    assert!(diag.angular_gap_max < std::f64::consts::PI);
}

#[test]
fn disk_variant_gives_the_same_trace() {
    let seq = generate(2000).unwrap();
    let sphere = build_from(seq.clone(), Variant::Sphere).unwrap();
    let disk = build_from(seq, Variant::Disk).unwrap();
    let ts = sphere.run_corollary(500).unwrap();
    let td = disk.run_corollary(500).unwrap();
    assert_eq!(ts.a, td.a);
    assert_eq!(ts.b, td.b);
    let circle = ProjectorSpec::sphere(Point::origin(2), 1.0).unwrap();
    let ball = ProjectorSpec::ball(Point::origin(2), 1.0).unwrap();
    for q in ts.a.iter().chain(&ts.b) {
        let ps = project(&circle, q, DEFAULT_TIE_TOL).unwrap();
        let pb = project(&ball, q, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(ps.candidates, pb.candidates);
    }
}

#[test]
fn truncation_leaves_every_projection_strict() {
    let sets = build(2000, Variant::Sphere).unwrap();
    let trace = sets.run_corollary(500).unwrap();
    let tie = sets.tie_tol();
    let queries = std::iter::once(&sets.sequence().records[0].x).chain(trace.b.iter());
    for (n, q) in queries.take(trace.len()).enumerate() {
        let r = project(&sets.a, q, tie).unwrap();
        assert!(!r.multivalued && r.margin > 0.0, "a_{n}");
        let r = project(&sets.b, &trace.a[n], tie).unwrap();
        assert!(!r.multivalued && r.margin > 0.0, "b_{n}");
    }
}

#[test]
fn starts_outside_the_disk_join_the_tail() {
    let sets = build(4000, Variant::Sphere).unwrap();
    let (outcome, trace) = sets.classify_start(&p(3.0, 3.0), 200).unwrap();
    let StartOutcome::JoinsTail { m, pairs } = outcome else { panic!("{outcome:?}") };
    assert_eq!(pairs, 200);
    assert_eq!(trace.a[0], sets.sequence().records[2 * m].x);
    assert!(trace.a[0].norm() > 1.0);

    let (outcome, _) = sets.classify_start(&p(1.5, 0.5), 200).unwrap();
    assert!(matches!(outcome, StartOutcome::JoinsTail { .. }), "{outcome:?}");
}

#[test]
fn starts_on_the_circle_stay_put() {
    let sets = build(200, Variant::Sphere).unwrap();
    for t in [0.0, 1.0, 2.5, 4.0] {
        let start = p(f64::cos(t), f64::sin(t));
        let (outcome, trace) = sets.classify_start(&start, 50).unwrap();
        assert_eq!(outcome, StartOutcome::Constant);
        assert!(trace.a.iter().chain(&trace.b).all(|x| x.dist(&start) <= 1e-15));
    }
}

#[test]
fn starts_inside_the_disk_do_not_crash() {
    let sets = build(200, Variant::Sphere).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let r = rng.gen_range(0.05..0.95);
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut cfg = sets.config(p(r * t.cos(), r * t.sin()), 50);
        cfg.tie_policy = TiePolicy::LowestIndex;
        run(&cfg).unwrap();
    }
    // the center itself has no well-defined projection onto the circle
    assert!(run(&sets.config(Point::origin(2), 5)).is_err());
}
