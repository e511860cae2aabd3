//! The iterate sequence `α_{n+1} = next_alpha(α_n)`, `x_n = x(α_n)`, starting
//! from `α_0 = 0`, and the checks run over finite prefixes of it.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::euclid::{nearest_in_cloud, Point, PointCloud};
use crate::numfmt::{compensated_sum, sig17, to_json_writer};
use crate::spiral::{self, curve, eps, next_alpha, rho, Angle};

/// Generation stops once an angle exceeds this; `e^{-α}` is close to
/// underflow beyond it.
pub const MAX_ALPHA: f64 = 700.0;

/// Tolerance for `‖x_n − x_{n+1}‖ = ε_n` and the raw half-angle identity.
pub const STEP_IDENTITY_TOL: f64 = 1e-10;
/// Tolerance for the half-angle identity divided through by `ρ_n²`.
pub const SCALED_IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for `|‖x_n‖ − 1| = e^{−α_n}`.
pub const SPHERE_GAP_TOL: f64 = 1e-12;
/// Tolerance for `Σ δ_k = α_N − α_0`.
pub const TELESCOPE_TOL: f64 = 1e-10;

/// One row of the sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiralRecord {
    pub n: usize,
    pub alpha: Angle,
    /// `α_{n+1} − α_n`; absent on the last record.
    pub delta: Option<f64>,
    pub rho: f64,
    pub eps: f64,
    pub x: Point,
    /// `ρ_{n+1} / ρ_n`; absent on the last record.
    pub q: Option<f64>,
}

impl SpiralRecord {
    fn at(n: usize, alpha: Angle) -> Self {
        SpiralRecord { n, alpha, delta: None, rho: rho(alpha), eps: eps(alpha), x: curve(alpha), q: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceReport {
    pub records: Vec<SpiralRecord>,
    /// `Σ δ_k`, compensated.
    pub partial_delta_sum: f64,
    /// `Σ ε_k` over the steps present, compensated.
    pub partial_eps_sum: f64,
    /// `max_n |‖x_n − x_{n+1}‖ − ε_n|`.
    pub max_identity_residual: f64,
    /// Filled in by whoever runs [`verify_nearest`].
    pub min_nearest_margin: Option<f64>,
    /// Generation stopped at [`MAX_ALPHA`] before reaching the requested length.
    pub stopped_at_max_alpha: bool,
}

impl SequenceReport {
    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.alpha.radians())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The points `x_0, …, x_{N−1}` as a cloud.
    pub fn cloud(&self, upto: usize) -> Result<PointCloud> {
        PointCloud::new(self.records[..upto.min(self.records.len())].iter().map(|r| r.x.clone()).collect())
    }

    fn recompute_sums(&mut self) {
        self.partial_delta_sum = compensated_sum(self.records.iter().filter_map(|r| r.delta));
        self.partial_eps_sum = compensated_sum(self.records.iter().filter(|r| r.delta.is_some()).map(|r| r.eps));
        self.max_identity_residual = check_step_identity(self);
    }
}

/// Produces `n_max` records starting from `α_0 = 0`.
pub fn generate(n_max: usize) -> Result<SequenceReport> {
    generate_with_tol(n_max, spiral::DEFAULT_ANGLE_TOL)
}

pub fn generate_with_tol(n_max: usize, tol: f64) -> Result<SequenceReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("sequence length must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(n_max);
    records.push(SpiralRecord::at(0, Angle::ZERO));
    let mut stopped = false;
    while records.len() < n_max {
        let last = records.last_mut().expect("nonempty");
        if last.alpha.radians() > MAX_ALPHA {
            stopped = true;
            break;
        }
        let next = next_alpha(last.alpha, tol)?;
        // exact: α_n ≤ α_{n+1} ≤ 2α_n once n ≥ 1, and α_0 = 0
        last.delta = Some(next.radians() - last.alpha.radians());
        let n = last.n + 1;
        let prev_rho = last.rho;
        let rec = SpiralRecord::at(n, next);
        last.q = Some(rec.rho / prev_rho);
        records.push(rec);
    }
    let mut report = SequenceReport {
        records,
        partial_delta_sum: 0.0,
        partial_eps_sum: 0.0,
        max_identity_residual: 0.0,
        min_nearest_margin: None,
        stopped_at_max_alpha: stopped,
    };
    report.recompute_sums();
    Ok(report)
}

fn steps(report: &SequenceReport) -> impl Iterator<Item = (&SpiralRecord, &SpiralRecord)> {
    report.records.iter().zip(report.records.iter().skip(1))
}

/// `max_n |‖x_n − x_{n+1}‖ − ε_n|`; zero for a single record.
pub fn check_step_identity(report: &SequenceReport) -> f64 {
    steps(report).map(|(a, b)| (a.x.dist(&b.x) - a.eps).abs()).fold(0.0, f64::max)
}

/// Residuals of `ε_n² = (ρ_n − ρ_{n+1})² + 4ρ_nρ_{n+1} sin²(δ_n/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfAngleResiduals {
    /// The identity as written.
    pub raw: f64,
    /// Divided through by `ρ_n²`: `ε_n²/ρ_n² = (1 − q_n)² + 4 q_n sin²(δ_n/2)`.
    pub scaled: f64,
    /// `ε_n/ρ_n` against its closed form `½(1 − e^{−2π}) / (1 + e^{α_n})`.
    pub ratio: f64,
}

impl HalfAngleResiduals {
    pub fn max(&self) -> f64 {
        self.raw.max(self.scaled).max(self.ratio)
    }
}

pub fn check_halfangle_identity(report: &SequenceReport) -> HalfAngleResiduals {
    let mut out = HalfAngleResiduals { raw: 0.0, scaled: 0.0, ratio: 0.0 };
    for (a, b) in steps(report) {
        let (Some(delta), Some(q)) = (a.delta, a.q) else { continue };
        let s2 = (0.5 * delta).sin().powi(2);
        let raw = a.eps * a.eps - ((a.rho - b.rho).powi(2) + 4.0 * a.rho * b.rho * s2);
        let lhs = (a.eps / a.rho).powi(2);
        let scaled = lhs - ((1.0 - q).powi(2) + 4.0 * q * s2);
        out.raw = out.raw.max(raw.abs());
        out.scaled = out.scaled.max(scaled.abs());
        out.ratio = out.ratio.max((a.eps / a.rho - spiral::eps_over_rho(a.alpha)).abs());
    }
    out
}

/// `|Σ δ_k − (α_{N−1} − α_0)|`.
pub fn telescoping_residual(report: &SequenceReport) -> f64 {
    let first = report.records.first().map_or(0.0, |r| r.alpha.radians());
    let last = report.records.last().map_or(0.0, |r| r.alpha.radians());
    (report.partial_delta_sum - (last - first)).abs()
}

/// Largest gap between consecutive angles on the circle, wrap-around included.
/// A single distinct direction yields `2π`.
pub fn max_circular_gap<I: IntoIterator<Item = f64>>(angles: I) -> f64 {
    let mut v: Vec<f64> = angles.into_iter().map(|a| a.rem_euclid(TAU)).collect();
    if v.is_empty() {
        return TAU;
    }
    v.sort_by(f64::total_cmp);
    let inner = v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    inner.max(TAU - (v[v.len() - 1] - v[0]))
}

/// Tail values and horizon statistics of a sequence prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitSummary {
    pub alpha_tail: f64,
    pub delta_tail: f64,
    pub eps_tail: f64,
    pub rho_tail: f64,
    /// `|‖x_N‖ − 1|`, the distance of the last point from the unit circle.
    pub sphere_gap_tail: f64,
    /// First index from which `sin(δ_k/2) ≥ δ_k/4` holds for every later step.
    pub taylor_start: usize,
    /// `Σ_{k ≥ taylor_start} ε_k`.
    pub eps_sum_from_taylor_start: f64,
    /// `max_k δ_k` and its value in degrees.
    pub max_delta: f64,
    /// Largest gap in `{α_n mod 2π}`.
    pub circular_gap: f64,
}

/// Minimum number of records [`check_limits`] accepts.
pub const MIN_LIMIT_RECORDS: usize = 100;

fn violated(check: &'static str, index: usize, detail: String) -> Error {
    Error::CheckFailed { check, index, detail }
}

/// Checks the monotone behaviour of a prefix and reports its tail.
///
/// Fails if some `δ_n ≤ 0`, `ε_n` fails to strictly decrease, the sphere gap
/// is not decreasing, or a step violates `ε_k > δ_k / 2` past the Taylor
/// start.
pub fn check_limits(report: &SequenceReport) -> Result<LimitSummary> {
    let recs = &report.records;
    if recs.len() < MIN_LIMIT_RECORDS {
        return Err(Error::InvalidArgument(format!(
            "limit checks need at least {MIN_LIMIT_RECORDS} records, got {}",
            recs.len()
        )));
    }
    for (a, b) in steps(report) {
        let delta = a.delta.unwrap_or(f64::NAN);
        if !(delta > 0.0) {
            return Err(violated("delta positive", a.n, format!("delta = {delta}")));
        }
        if !(b.eps < a.eps) {
            return Err(violated("eps strictly decreasing", a.n, format!("{} then {}", a.eps, b.eps)));
        }
        if !(b.x.norm() - 1.0 <= a.x.norm() - 1.0) {
            return Err(violated("sphere gap decreasing", a.n, format!("{} then {}", a.x.norm(), b.x.norm())));
        }
    }
    let deltas: Vec<f64> = recs.iter().filter_map(|r| r.delta).collect();
    let taylor_start = deltas.iter().rposition(|&d| (0.5 * d).sin() < d / 4.0).map_or(0, |k| k + 1);
    for (k, &d) in deltas.iter().enumerate().skip(taylor_start) {
        if !(recs[k].eps > d / 2.0) {
            return Err(violated("eps exceeds delta/2", k, format!("eps = {}, delta = {d}", recs[k].eps)));
        }
    }
    let tail = recs.last().expect("nonempty");
    let before_tail = &recs[recs.len() - 2];
    Ok(LimitSummary {
        alpha_tail: tail.alpha.radians(),
        delta_tail: before_tail.delta.expect("filled"),
        eps_tail: tail.eps,
        rho_tail: tail.rho,
        sphere_gap_tail: (tail.x.norm() - 1.0).abs(),
        taylor_start,
        eps_sum_from_taylor_start: compensated_sum(recs[taylor_start..recs.len() - 1].iter().map(|r| r.eps)),
        max_delta: deltas.iter().copied().fold(0.0, f64::max),
        circular_gap: max_circular_gap(report.alphas()),
    })
}

/// Margins observed while verifying the nearest-point property.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearestSummary {
    /// Smallest gap between `‖x_n − x_{n+1}‖` and the next-nearest sequence point.
    pub min_cloud_margin: f64,
    /// Smallest `e^{−α_n} − ε_n`, the lead of `x_{n+1}` over the unit circle.
    pub min_sphere_margin: f64,
    /// Largest `||‖x_n‖ − 1| − e^{−α_n}|`.
    pub max_sphere_gap_residual: f64,
}

impl NearestSummary {
    pub fn min_margin(&self) -> f64 {
        self.min_cloud_margin.min(self.min_sphere_margin)
    }
}

/// Brute-force check that for every `n < horizon − 1` the nearest point to
/// `x_n` in `({x_0, …, x_horizon} ∪ S) ∖ {x_n}` is `x_{n+1}`, uniquely.
pub fn verify_nearest(report: &SequenceReport, horizon: usize) -> Result<NearestSummary> {
    if horizon < 2 || horizon >= report.len() {
        return Err(Error::InvalidArgument(format!(
            "nearest-point horizon must lie in [2, {}], got {horizon}",
            report.len().saturating_sub(1)
        )));
    }
    let cloud = report.cloud(horizon + 1)?;
    let mut out = NearestSummary {
        min_cloud_margin: f64::INFINITY,
        min_sphere_margin: f64::INFINITY,
        max_sphere_gap_residual: 0.0,
    };
    for rec in &report.records[..horizon - 1] {
        let n = rec.n;
        let hit = nearest_in_cloud(&cloud, &rec.x, Some(n))?;
        if hit.index != n + 1 || !(hit.margin > 0.0) {
            return Err(Error::NearestPropertyViolated(n));
        }
        let sphere_gap = (rec.x.norm() - 1.0).abs();
        let decay = (-rec.alpha.radians()).exp();
        let sphere_margin = sphere_gap - hit.distance;
        if !(sphere_margin > 0.0) {
            return Err(Error::NearestPropertyViolated(n));
        }
        out.min_cloud_margin = out.min_cloud_margin.min(hit.margin);
        out.min_sphere_margin = out.min_sphere_margin.min(decay - rec.eps);
        out.max_sphere_gap_residual = out.max_sphere_gap_residual.max((sphere_gap - decay).abs());
    }
    Ok(out)
}

/// Everything [`verify_report`] measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub records: usize,
    pub step_identity: f64,
    pub half_angle: HalfAngleResiduals,
    pub telescoping: f64,
    pub max_delta: f64,
    pub max_sphere_gap_residual: f64,
    pub nearest: Option<NearestSummary>,
    pub limits: Option<LimitSummary>,
}

/// Runs every per-record and per-step check on `report`, then the
/// nearest-point check up to `nearest_horizon` and, given enough records,
/// the limit checks.
pub fn verify_report(report: &SequenceReport, nearest_horizon: usize) -> Result<VerificationSummary> {
    let step_identity = check_step_identity(report);
    if step_identity > STEP_IDENTITY_TOL {
        let index = steps(report)
            .position(|(a, b)| (a.x.dist(&b.x) - a.eps).abs() > STEP_IDENTITY_TOL)
            .unwrap_or(0);
        return Err(violated(
            "step identity |x_n - x_{n+1}| = eps_n",
            index,
            format!("residual {step_identity:e}"),
        ));
    }
    for r in &report.records {
        if r.x != curve(r.alpha) || r.rho != rho(r.alpha) || r.eps != eps(r.alpha) {
            return Err(violated("record consistent with its angle", r.n, "stored values differ".into()));
        }
        if let Some(q) = r.q {
            if !(q > 0.0 && q < 1.0) {
                return Err(violated("ratio q_n in (0, 1)", r.n, format!("q = {q}")));
            }
        }
    }
    let half_angle = check_halfangle_identity(report);
    if half_angle.raw > STEP_IDENTITY_TOL || half_angle.scaled > SCALED_IDENTITY_TOL || half_angle.ratio > SCALED_IDENTITY_TOL {
        return Err(violated("half-angle identity", 0, format!("{half_angle:?}")));
    }
    let telescoping = telescoping_residual(report);
    if telescoping > TELESCOPE_TOL {
        return Err(violated("telescoping sum of delta", report.len() - 1, format!("residual {telescoping:e}")));
    }
    let bound = spiral::deg_to_rad(spiral::STEP_UPPER_DEG);
    let mut max_delta: f64 = 0.0;
    let mut max_sphere_gap_residual: f64 = 0.0;
    for r in &report.records {
        if let Some(d) = r.delta {
            if !(d > 0.0 && d <= bound) {
                return Err(violated("step within (0, 40 degrees]", r.n, format!("delta = {d}")));
            }
            max_delta = max_delta.max(d);
        }
        let decay = (-r.alpha.radians()).exp();
        let gap = (r.x.norm() - 1.0).abs();
        max_sphere_gap_residual = max_sphere_gap_residual.max((gap - decay).abs());
        if !(decay > r.eps) {
            return Err(violated("circle farther than eps", r.n, format!("{decay} <= {}", r.eps)));
        }
    }
    if max_sphere_gap_residual > SPHERE_GAP_TOL {
        return Err(violated("distance to circle equals exp(-alpha)", 0, format!("{max_sphere_gap_residual:e}")));
    }
    let nearest_horizon = nearest_horizon.min(report.len().saturating_sub(1));
    let nearest = if nearest_horizon >= 2 { Some(verify_nearest(report, nearest_horizon)?) } else { None };
    let limits = if report.len() >= MIN_LIMIT_RECORDS { Some(check_limits(report)?) } else { None };
    Ok(VerificationSummary {
        records: report.len(),
        step_identity,
        half_angle,
        telescoping,
        max_delta,
        max_sphere_gap_residual,
        nearest,
        limits,
    })
}

/// Writes `n,alpha,delta,rho,eps,x,y` rows with 17 significant digits.
pub fn write_csv<W: Write>(records: &[SpiralRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "n,alpha,delta,rho,eps,x,y")?;
    for r in records {
        let c = r.x.coords();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            sig17(r.alpha.radians()),
            r.delta.map(sig17).unwrap_or_default(),
            sig17(r.rho),
            sig17(r.eps),
            sig17(c[0]),
            sig17(c[1]),
        )?;
    }
    Ok(())
}

/// Writes the records as a JSON array of objects.
pub fn write_json<W: Write>(records: &[SpiralRecord], w: W) -> io::Result<()> {
    to_json_writer(w, records).map_err(io::Error::other)
}

/// Test hook: shifts `x_n` off the curve so that verification must fail.
#[doc(hidden)]
pub fn corrupt_record(report: &mut SequenceReport, n: usize, shift: f64) -> Result<()> {
    let rec = report
        .records
        .get_mut(n)
        .ok_or_else(|| Error::InvalidArgument(format!("no record {n}")))?;
    let c = rec.x.coords();
    rec.x = Point::new(vec![c[0] + shift, c[1]])?;
    Ok(())
}

/// `40°` in radians, the rounded cap on every step.
pub fn step_cap() -> f64 {
    40.0 * PI / 180.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_record() {
        let r = generate(1).unwrap();
        assert_eq!(r.len(), 1);
        let x0 = &r.records[0];
        assert_eq!(x0.x, Point::xy(2.0, 0.0).unwrap());
        assert_eq!(x0.rho, 2.0);
        assert!((x0.eps - 0.4990663).abs() < 1e-7);
        assert_eq!(x0.delta, None);
        assert_eq!(r.partial_delta_sum, 0.0);
        assert_eq!(check_step_identity(&r), 0.0);
        assert_eq!(check_halfangle_identity(&r).max(), 0.0);
        assert!(generate(0).is_err());
    }

    #[test]
    fn first_sixteen_points() {
        let r = generate(16).unwrap();
        assert_eq!(r.len(), 16);
        // 40-digit references
        assert!((r.records[1].alpha.radians() - 0.23933370665002788382).abs() < 1e-14);
        assert!((r.records[2].alpha.radians() - 0.45186871143326998332).abs() < 1e-14);
        assert!((r.records[15].alpha.radians() - 1.9170777081668461392).abs() < 1e-13);
        for w in r.records.windows(2) {
            assert!(w[0].delta.unwrap() <= step_cap());
            assert!(w[1].eps < w[0].eps);
        }
        assert!(r.records[15].delta.is_none() && r.records[14].delta.is_some());
    }

    #[test]
    fn long_prefix_matches_high_precision_reference() {
        let r = generate(1001).unwrap();
        assert!((r.records[100].alpha.radians() - 3.8650883925242343855).abs() < 1e-12);
        assert!((r.records[1000].alpha.radians() - 6.2047656077382183400).abs() < 1e-11);
    }

    #[test]
    fn halfangle_identity_on_first_step() {
        let r = generate(2).unwrap();
        let res = check_halfangle_identity(&r);
        assert!(res.raw <= 1e-10 && res.scaled <= 1e-12, "{res:?}");
    }

    #[test]
    fn circular_gap_basics() {
        assert_eq!(max_circular_gap([1.0]), TAU);
        assert_eq!(max_circular_gap([1.0, 1.0 + TAU]), TAU);
        let g = max_circular_gap([0.0, PI]);
        assert!((g - PI).abs() < 1e-15);
        let g = max_circular_gap([0.1, 0.2, 6.0]);
        assert!((g - 5.8).abs() < 1e-12);
    }

    #[test]
    fn limits_need_enough_records() {
        let r = generate(50).unwrap();
        assert!(check_limits(&r).is_err());
    }

    #[test]
    fn nearest_on_tiny_horizon() {
        let r = generate(3).unwrap();
        let s = verify_nearest(&r, 2).unwrap();
        assert!(s.min_margin() > 0.0);
        assert!(verify_nearest(&r, 3).is_err());
        assert!(verify_nearest(&r, 1).is_err());
    }

    #[test]
    fn corrupted_record_fails_step_identity() {
        let mut r = generate(200).unwrap();
        assert!(verify_report(&r, 150).is_ok());
        corrupt_record(&mut r, 7, 1e-6).unwrap();
        match verify_report(&r, 150) {
            Err(Error::CheckFailed { check, index, .. }) => {
                assert!(check.starts_with("step identity"));
                assert_eq!(index, 6);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn csv_layout() {
        let r = generate(2).unwrap();
        let mut buf = Vec::new();
        write_csv(&r.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,alpha,delta,rho,eps,x,y");
        assert!(lines[1].starts_with("0,0.0000000000000000e0,2.3933370665002"));
        assert!(lines[1].ends_with(",2.0000000000000000e0,0.0000000000000000e0"));
        let last: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(last.len(), 7);
        assert_eq!(last[2], "");
        assert_eq!(last[1].parse::<f64>().unwrap(), r.records[1].alpha.radians());
    }

    #[test]
    fn json_layout() {
        let r = generate(2).unwrap();
        let mut buf = Vec::new();
        write_json(&r.records, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["x"][0].as_f64(), Some(2.0));
        assert!(v[1]["delta"].is_null());
        assert_eq!(v[0]["n"], 0);
        assert_eq!(v[0]["q"].as_f64(), r.records[0].q);
    }
}
