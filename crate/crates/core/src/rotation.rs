//! Rotation numbers and mode locking for the invertible regime b ≤ 1.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::cycles::{find_cycles, gcd};
use crate::error::{Error, Result};
use crate::map::{lift_raw, LiftPoint, Parameters};

pub const DEFAULT_ITERATIONS: usize = 100_000;
pub const MIN_ITERATIONS: usize = 1000;
pub const DEFAULT_Q_MAX: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationEstimate {
    /// Rotation number reduced into [0, 1).
    pub value: f64,
    /// Unreduced mean lift displacement per step, in turns.
    pub lift_mean: f64,
    pub iterations_used: usize,
    /// Heuristic bound on |value − ρ|.
    pub error_bound: f64,
}

fn require_invertible(p: &Parameters) -> Result<()> {
    if p.b() > 1.0 {
        Err(Error::Domain(format!(
            "rotation number is orbit-dependent for b = {} > 1",
            p.b()
        )))
    } else {
        Ok(())
    }
}

/// (Fⁿ(x₀) − x₀) / (2πn), reduced mod 1.
///
/// The lift is carried as a reduced angle plus a count of whole turns, so the
/// displacement keeps full precision for long runs.
pub fn rotation_number(p: &Parameters, x0: LiftPoint, n: usize) -> Result<RotationEstimate> {
    require_invertible(p)?;
    if n < MIN_ITERATIONS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_ITERATIONS} iterations, got {n}"
        )));
    }
    let (alpha, b) = (p.alpha(), p.b());
    let start_turns = (x0.0 / TAU).round();
    let start = x0.0 - TAU * start_turns;
    let mut x = start;
    let mut turns = 0i64;
    for _ in 0..n {
        let next = lift_raw(alpha, b, x);
        let k = (next / TAU).round();
        x = next - TAU * k;
        turns += k as i64;
    }
    let lift_mean = (turns as f64 + (x - start) / TAU) / n as f64;
    // For a circle homeomorphism |Fⁿ(x) − x − 2πnρ| < 2π; rigid rotations
    // only carry rounding error.
    let diameter = if b == 0.0 { 1.0 } else { TAU };
    Ok(RotationEstimate {
        value: lift_mean.rem_euclid(1.0),
        lift_mean,
        iterations_used: n,
        error_bound: diameter / (TAU * n as f64),
    })
}

/// Rotation type (p, q), in lowest terms with 0 ≤ p < q, of an attracting
/// cycle of period at most `q_max`, if one exists.
///
/// Candidate windings come from the rotation number: a homeomorphism with a
/// periodic orbit of type p/q has rotation number exactly p/q.
pub fn is_mode_locked(p: &Parameters, q_max: usize) -> Result<Option<(i64, i64)>> {
    require_invertible(p)?;
    if q_max == 0 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    let est = rotation_number(p, LiftPoint(0.0), DEFAULT_ITERATIONS)?;
    for q in 1..=q_max {
        let target = est.lift_mean * q as f64;
        let w = target.round();
        if (target - w).abs() > (est.error_bound * q as f64).max(1e-6) + 1e-9 {
            continue;
        }
        let w = w as i64;
        if gcd(w, q as i64) != 1 && q != 1 {
            continue;
        }
        let cycles = find_cycles(p, q, w)?;
        if let Some(c) = cycles.iter().find(|c| c.stability.is_attracting()) {
            return Ok(Some(c.rotation_type()));
        }
    }
    Ok(None)
}
