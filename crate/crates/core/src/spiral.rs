//! The spiral `x(α) = ρ(α)(cos α, sin α)` with `ρ(α) = 1 + e^{-α}`, and the
//! root solver that walks it in steps of prescribed chord length
//! `ε(α) = (ρ(α) − ρ(α + 2π)) / 2`.
//!
//! Every chord `‖x(α + t) − x(α)‖²` is evaluated as
//! `(ρ(α) − ρ(α+t))² + 4 ρ(α) ρ(α+t) sin²(t/2)`, the half-angle rearrangement
//! of the law of cosines. The plain form `ρ_a² + ρ_b² − 2ρ_aρ_b cos t`
//! cancels catastrophically once the chord is much shorter than the radius.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclid::Point;

/// Default bisection tolerance, relative to the step being solved for.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-13;

/// `(1 − e^{−2π}) / 2`, so that `ε(t) = EPS_SCALE · e^{−t}`.
pub fn eps_scale() -> f64 {
    -(-2.0 * PI).exp_m1() / 2.0
}

/// Sharp lower bound on `β − α` implied by `‖x(β) − x(α)‖ ≤ ε(α)`:
/// `ln 2 − ln(3 − e^{−2π}) ≈ −0.405` (about −23.2°).
pub fn step_lower_bound() -> f64 {
    2f64.ln() - (3.0 - (-2.0 * PI).exp()).ln()
}

/// Sharp upper bound on `β − α`: `ln 2 − ln(1 + e^{−2π}) ≈ 0.691` (about 39.6°).
pub fn step_upper_bound() -> f64 {
    2f64.ln() - (-2.0 * PI).exp().ln_1p()
}

/// The rounded bounds −24° and +40°, in radians.
pub const STEP_LOWER_DEG: f64 = -24.0;
pub const STEP_UPPER_DEG: f64 = 40.0;

pub fn deg_to_rad(deg: f64) -> f64 {
    deg * PI / 180.0
}

/// A nonnegative, finite angle in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Result<Self> {
        if radians.is_finite() && radians >= 0.0 {
            Ok(Angle(radians))
        } else {
            Err(Error::InvalidAngle(radians))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Angle::new(v)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Search interval for the forward step `t = β − α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBracket {
    pub lo: Angle,
    pub hi: Angle,
}

impl StepBracket {
    /// `[0, π/2]`, the interval on which the squared chord length is
    /// strictly increasing in `t`.
    pub fn monotone() -> Self {
        StepBracket { lo: Angle::ZERO, hi: Angle(FRAC_PI_2) }
    }

    pub fn new(lo: Angle, hi: Angle) -> Result<Self> {
        if lo < hi && hi.0 - lo.0 <= FRAC_PI_2 {
            Ok(StepBracket { lo, hi })
        } else {
            Err(Error::InvalidArgument(format!("bad step bracket [{}, {}]", lo.0, hi.0)))
        }
    }
}

/// Distance of `x(t)` from the origin.
pub fn rho(t: Angle) -> f64 {
    1.0 + (-t.0).exp()
}

/// Chord length prescribed at `x(t)`: `(ρ(t) − ρ(t + 2π)) / 2`.
pub fn eps(t: Angle) -> f64 {
    eps_scale() * (-t.0).exp()
}

/// `ε(t) / ρ(t) = ½ (1 − e^{−2π}) / (1 + e^t)`, strictly decreasing.
pub fn eps_over_rho(t: Angle) -> f64 {
    eps_scale() / (1.0 + t.0.exp())
}

pub fn curve(alpha: Angle) -> Point {
    let r = rho(alpha);
    let (s, c) = alpha.0.sin_cos();
    Point::xy(r * c, r * s).expect("curve points are finite")
}

/// `‖x(α + t) − x(α)‖²`.
pub fn chord_sq(alpha: Angle, t: Angle) -> f64 {
    let decay = (-alpha.0).exp();
    let ra = 1.0 + decay;
    let rb = 1.0 + decay * (-t.0).exp();
    let radial = decay * -(-t.0).exp_m1();
    let half = (0.5 * t.0).sin();
    radial * radial + 4.0 * ra * rb * half * half
}

/// Forward step `t ∈ (0, π/2]` with `‖x(α + t) − x(α)‖ = ε(α)`.
///
/// Bisection on `t ↦ chord_sq(α, t) − ε(α)²` over [`StepBracket::monotone`];
/// stops once the bracket is narrower than `tol` relative to its upper end
/// or stops shrinking in floating point.
pub fn next_step(alpha: Angle, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("angle tolerance must be positive, got {tol}")));
    }
    let target = eps(alpha).powi(2);
    let g = |t: f64| chord_sq(alpha, Angle(t)) - target;
    let StepBracket { lo, hi } = StepBracket::monotone();
    let (mut lo, mut hi) = (lo.0, hi.0);
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(Error::BracketInvalid { alpha: alpha.0, lo, hi });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The unique `β > α` with `‖x(β) − x(α)‖ = ε(α)`.
pub fn next_alpha(alpha: Angle, tol: f64) -> Result<Angle> {
    let t = next_step(alpha, tol)?;
    Angle::new(alpha.0 + t)
}
