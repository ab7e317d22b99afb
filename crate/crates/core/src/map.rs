//! The Arnold family f(θ) = θ + α + b·sin θ (mod 2π), its lift to the real
//! line, derivatives and critical points.
//!
//! Hot loops elsewhere in the crate iterate raw `f64` angles through
//! [`advance`], which reduces with [`wrap_symmetric`]. That reduction is an
//! odd function in floating point, so an orbit at (−α, −θ₀) is bit-for-bit
//! the negation of the orbit at (α, θ₀). Classification and rendering rely on
//! this to keep parameter-plane images exactly mirror symmetric.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Reduce `x` into [−π, π] using round-half-away-from-zero. Odd in floating
/// point: `wrap_symmetric(-x) == -wrap_symmetric(x)`.
#[inline]
pub fn wrap_symmetric(x: f64) -> f64 {
    x - TAU * (x / TAU).round()
}

/// Reduce `x` into the canonical half-open range [−π, π).
#[inline]
pub fn wrap_angle(x: f64) -> f64 {
    let r = wrap_symmetric(x);
    if r >= PI {
        r - TAU
    } else if r < -PI {
        r + TAU
    } else {
        r
    }
}

/// Signed shortest displacement from `from` to `to` on the circle.
#[inline]
pub fn signed_circle_difference(to: f64, from: f64) -> f64 {
    wrap_symmetric(to - from)
}

#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    wrap_symmetric(a - b).abs()
}

/// One member (α, b) of the family. α is kept in [−π, π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Parameters {
    alpha: f64,
    b: f64,
}

impl Parameters {
    pub fn new(alpha: f64, b: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
        }
        if !b.is_finite() || b < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "b must be finite and non-negative, got {b}"
            )));
        }
        let alpha = if (-PI..PI).contains(&alpha) {
            alpha
        } else {
            wrap_angle(alpha)
        };
        Ok(Self { alpha, b })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// The parameter (−α, b), conjugate to this one under θ ↦ −θ.
    pub fn mirrored(&self) -> Self {
        Self::new(-self.alpha, self.b).expect("negation preserves validity")
    }

    /// max(|Δα|, |Δb|), with Δα measured on the circle.
    pub fn distance(&self, other: &Parameters) -> f64 {
        circle_distance(self.alpha, other.alpha).max((self.b - other.b).abs())
    }
}

impl fmt::Display for Parameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(alpha={}, b={})", self.alpha, self.b)
    }
}

/// A point of S¹ = ℝ/2πℤ, stored in [−π, π).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct CircleAngle(f64);

impl CircleAngle {
    pub fn new(theta: f64) -> Self {
        Self(wrap_angle(theta))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Shortest arc length to `other`; always in [0, π].
    pub fn distance(self, other: CircleAngle) -> f64 {
        circle_distance(self.0, other.0)
    }

    pub fn lift(self) -> LiftPoint {
        LiftPoint(self.0)
    }
}

/// A point of the universal cover ℝ.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct LiftPoint(pub f64);

impl LiftPoint {
    pub fn project(self) -> CircleAngle {
        CircleAngle::new(self.0)
    }
}

/// The lift F(x) = x + α + b·sin x as a raw function.
#[inline]
pub(crate) fn lift_raw(alpha: f64, b: f64, x: f64) -> f64 {
    x + alpha + b * x.sin()
}

/// One step of the circle map on raw angles, reduced symmetrically.
#[inline]
pub(crate) fn advance(alpha: f64, b: f64, x: f64) -> f64 {
    wrap_symmetric(lift_raw(alpha, b, x))
}

#[inline]
pub(crate) fn derivative_raw(b: f64, x: f64) -> f64 {
    1.0 + b * x.cos()
}

pub fn step(p: &Parameters, theta: CircleAngle) -> CircleAngle {
    CircleAngle::new(lift_raw(p.alpha, p.b, theta.0))
}

pub fn lift_step(p: &Parameters, x: LiftPoint) -> LiftPoint {
    LiftPoint(lift_raw(p.alpha, p.b, x.0))
}

/// f′(θ) = 1 + b·cos θ.
pub fn derivative(p: &Parameters, theta: CircleAngle) -> f64 {
    derivative_raw(p.b, theta.0)
}

/// A real number kept as sign and log-magnitude so that long derivative
/// products neither overflow nor underflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Multiplier {
    pub log_abs: f64,
    /// −1, 0 or +1.
    pub sign: i8,
}

impl Multiplier {
    pub const ONE: Multiplier = Multiplier { log_abs: 0.0, sign: 1 };

    pub fn from_value(v: f64) -> Self {
        Self::ONE.times(v)
    }

    #[must_use]
    pub fn times(self, factor: f64) -> Self {
        if factor == 0.0 || self.sign == 0 {
            return Multiplier {
                log_abs: f64::NEG_INFINITY,
                sign: 0,
            };
        }
        let sign = if factor < 0.0 { -self.sign } else { self.sign };
        Multiplier {
            log_abs: self.log_abs + factor.abs().ln(),
            sign,
        }
    }

    pub fn abs(self) -> f64 {
        self.log_abs.exp()
    }

    pub fn value(self) -> f64 {
        f64::from(self.sign) * self.abs()
    }
}

/// Which of the two critical points ±arccos(−1/b).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CriticalBranch {
    /// +arccos(−1/b)
    First,
    /// −arccos(−1/b)
    Second,
}

impl CriticalBranch {
    pub fn other(self) -> Self {
        match self {
            CriticalBranch::First => CriticalBranch::Second,
            CriticalBranch::Second => CriticalBranch::First,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub branch: CriticalBranch,
    pub point: CircleAngle,
    pub value: CircleAngle,
}

/// Raw critical angle of `branch`, unreduced; odd in the branch sign.
/// Only meaningful for b ≥ 1 (b = 1 gives ±π for both branches).
#[inline]
pub(crate) fn critical_angle_raw(b: f64, branch: CriticalBranch) -> f64 {
    let c = (-1.0 / b).acos();
    match branch {
        CriticalBranch::First => c,
        CriticalBranch::Second => -c,
    }
}

/// The two (critical point, critical value) pairs, positive root first.
///
/// `b < 1` has no critical points and gives [`Error::Domain`]; `b == 1` has
/// the single degenerate point θ = π, reported through
/// [`Error::DegenerateCritical`].
pub fn critical_points(p: &Parameters) -> Result<[CriticalPoint; 2]> {
    if p.b < 1.0 {
        return Err(Error::Domain(format!("no critical points for b = {} < 1", p.b)));
    }
    let make = |branch| {
        let c = critical_angle_raw(p.b, branch);
        CriticalPoint {
            branch,
            point: CircleAngle::new(c),
            value: CircleAngle::new(lift_raw(p.alpha, p.b, c)),
        }
    };
    if p.b == 1.0 {
        return Err(Error::DegenerateCritical(make(CriticalBranch::First)));
    }
    Ok([make(CriticalBranch::First), make(CriticalBranch::Second)])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitRecord {
    /// θ₀ … θₙ.
    pub angles: Vec<CircleAngle>,
    /// Π f′(θ_k) over k < n, when requested.
    pub derivative: Option<Multiplier>,
}

pub fn orbit(p: &Parameters, theta0: CircleAngle, n: usize, with_derivative: bool) -> OrbitRecord {
    let mut angles = Vec::with_capacity(n + 1);
    let mut x = theta0.0;
    let mut product = Multiplier::ONE;
    angles.push(theta0);
    for _ in 0..n {
        if with_derivative {
            product = product.times(derivative_raw(p.b, x));
        }
        x = advance(p.alpha, p.b, x);
        angles.push(CircleAngle::new(x));
    }
    OrbitRecord {
        angles,
        derivative: with_derivative.then_some(product),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(alpha: f64, b: f64) -> Parameters {
        Parameters::new(alpha, b).unwrap()
    }

    #[test]
    fn rigid_rotation_step() {
        let r = step(&params(0.3, 0.0), CircleAngle::new(0.1));
        assert_abs_diff_eq!(r.value(), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn pi_is_fixed_at_zero_alpha() {
        let r = step(&params(0.0, 0.5), CircleAngle::new(PI));
        assert!(r.distance(CircleAngle::new(PI)) < 1e-15);
        // π and −π are the same point; the canonical form is −π.
        assert_eq!(r.value(), -PI);
    }

    #[test]
    fn step_matches_extended_precision() {
        // 50-digit reference: 2.6305006741734240613...
        let r = step(&params(0.2, 1.7), CircleAngle::new(1.0));
        assert_abs_diff_eq!(r.value(), 2.630_500_674_173_424_061_3, epsilon = 1e-14);
    }

    #[test]
    fn lift_examples() {
        let r = lift_step(&params(0.3, 0.0), LiftPoint(6.0));
        assert_abs_diff_eq!(r.0, 6.3, epsilon = 1e-15);
        let r = lift_step(&params(0.0, 0.5), LiftPoint(PI));
        assert_abs_diff_eq!(r.0, PI, epsilon = 1e-15);
    }

    #[test]
    fn derivative_examples() {
        assert_abs_diff_eq!(
            derivative(&params(0.0, 0.5), CircleAngle::new(PI)),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            derivative(&params(0.0, 1.0), CircleAngle::new(PI)),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            derivative(&params(0.0, 2.0), CircleAngle::new(2.0 * PI / 3.0)),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn critical_points_at_b2() {
        let [c1, c2] = critical_points(&params(0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(c1.point.value(), 2.0 * PI / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c2.point.value(), -2.0 * PI / 3.0, epsilon = 1e-15);
        assert_eq!(c1.branch, CriticalBranch::First);
    }

    #[test]
    fn critical_points_degenerate_and_subcritical() {
        match critical_points(&params(0.0, 1.0)) {
            Err(Error::DegenerateCritical(c)) => {
                assert!(c.point.distance(CircleAngle::new(PI)) < 1e-15)
            }
            other => panic!("expected DegenerateCritical, got {other:?}"),
        }
        assert!(matches!(critical_points(&params(0.0, 0.9)), Err(Error::Domain(_))));
    }

    #[test]
    fn critical_values_match_extended_precision() {
        let [c1, c2] = critical_points(&params(0.1, 1.2)).unwrap();
        assert_abs_diff_eq!(c1.point.value(), 2.555_907_110_132_642_278_8, epsilon = 1e-14);
        assert_abs_diff_eq!(c1.value.value(), -2.963_953_238_975_864_228_3, epsilon = 1e-14);
        assert_abs_diff_eq!(c2.point.value(), -2.555_907_110_132_642_278_8, epsilon = 1e-14);
        assert_abs_diff_eq!(c2.value.value(), -3.119_232_068_203_722_248_7, epsilon = 1e-14);
    }

    #[test]
    fn orbit_edge_cases() {
        let p = params(0.0, 0.5);
        let rec = orbit(&p, CircleAngle::new(1.0), 0, true);
        assert_eq!(rec.angles.len(), 1);
        assert_eq!(rec.derivative.unwrap().value(), 1.0);

        let rec = orbit(&p, CircleAngle::new(PI), 5, true);
        assert_eq!(rec.angles.len(), 6);
        for a in &rec.angles {
            assert!(a.distance(CircleAngle::new(PI)) < 1e-15);
        }
        assert_abs_diff_eq!(rec.derivative.unwrap().value(), 0.03125, epsilon = 1e-15);
        assert!(orbit(&p, CircleAngle::new(0.3), 4, false).derivative.is_none());
    }

    #[test]
    fn long_orbit_matches_extended_precision() {
        // 50-digit reference after 100 steps: −1.83016523216546148...
        let rec = orbit(&params(0.37, 2.5), CircleAngle::new(0.2), 100, false);
        let last = rec.angles.last().unwrap().value();
        assert_abs_diff_eq!(last, -1.830_165_232_165_461_481_4, epsilon = 1e-8);
    }

    #[test]
    fn multiplier_handles_zero_and_underflow() {
        let m = Multiplier::ONE.times(0.5).times(-2.0).times(3.0);
        assert_abs_diff_eq!(m.value(), -3.0, epsilon = 1e-14);
        assert_eq!(Multiplier::ONE.times(0.0).value(), 0.0);
        let tiny = (0..2000).fold(Multiplier::ONE, |m, _| m.times(1e-3));
        assert_abs_diff_eq!(tiny.log_abs, 2000.0 * 1e-3f64.ln(), epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn step_is_odd(alpha in -3.0f64..3.0, b in 0.0f64..5.0, theta in -3.0f64..3.0) {
            let p = params(alpha, b);
            let lhs = step(&p.mirrored(), CircleAngle::new(-theta));
            let rhs = step(&p, CircleAngle::new(theta));
            prop_assert!(lhs.distance(CircleAngle::new(-rhs.value())) == 0.0);
        }

        #[test]
        fn lift_commutes_with_deck(alpha in -PI..PI, b in 0.0f64..5.0, x in -50.0f64..50.0) {
            let p = params(alpha, b);
            let d = lift_step(&p, LiftPoint(x + TAU)).0 - lift_step(&p, LiftPoint(x)).0;
            prop_assert!((d - TAU).abs() < 1e-12);
        }

        #[test]
        fn lift_projects_to_step(alpha in -PI..PI, b in 0.0f64..5.0, theta in -PI..PI) {
            let p = params(alpha, b);
            let t = CircleAngle::new(theta);
            let via_lift = lift_step(&p, t.lift()).project();
            prop_assert!(via_lift.distance(step(&p, t)) <= 4.0 * f64::EPSILON);
        }

        #[test]
        fn canonical_range_and_distance_bound(x in -1e4f64..1e4, y in -1e4f64..1e4) {
            let a = CircleAngle::new(x);
            prop_assert!((-PI..PI).contains(&a.value()));
            prop_assert!(a.distance(CircleAngle::new(y)) <= PI);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..1000 {
            let p = params(rng.gen_range(-PI..PI), rng.gen_range(0.0..4.0));
            let x = rng.gen_range(-PI..PI);
            let fd = (lift_step(&p, LiftPoint(x + h)).0 - lift_step(&p, LiftPoint(x - h)).0) / (2.0 * h);
            assert!((fd - derivative(&p, CircleAngle::new(x))).abs() < 1e-6);
        }
    }

    #[test]
    fn critical_points_are_zeros_of_derivative() {
        for b in [1.0001, 1.2, 2.0, 3.7] {
            for c in critical_points(&params(0.4, b)).unwrap() {
                assert!(derivative(&params(0.4, b), c.point).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parameters_normalize_alpha() {
        let p = params(PI, 1.0);
        assert_eq!(p.alpha(), -PI);
        let p = params(7.0, 1.0);
        assert_abs_diff_eq!(p.alpha(), 7.0 - TAU, epsilon = 1e-15);
        assert!(Parameters::new(0.0, -0.1).is_err());
        assert!(Parameters::new(f64::NAN, 1.0).is_err());
    }
}
