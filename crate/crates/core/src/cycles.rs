//! Periodic cycles of the circle map: location, multipliers and stability.
//!
//! A cycle of period q and winding w is a zero of
//! G(x) = F^q(x) − x − 2π·w on the lift. Roots are bracketed by a sign-change
//! scan, narrowed by bisection and polished by Newton's method.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{advance, circle_distance, derivative_raw, lift_raw, CircleAngle, Multiplier, Parameters};

/// |multiplier| below this is superattracting.
pub const SUPERATTRACTING_BOUND: f64 = 1e-8;
/// Half-width of the band around |multiplier| = 1 reported as neutral.
pub const NEUTRAL_BAND: f64 = 1e-9;
/// Maximum |G| accepted for a returned cycle.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Roots closer than this are the same root.
pub const MERGE_TOL: f64 = 1e-9;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;
const NEWTON_MAX_STEP: f64 = 0.5;
/// Bracket width at which bisection hands over to Newton.
const BISECT_HANDOFF: f64 = 1e-6;
/// Distance at which an orbit point counts as a return to the start when
/// testing for a smaller true period.
const PERIOD_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Stability {
    Attracting,
    Superattracting,
    Repelling,
    Neutral,
}

impl Stability {
    pub fn from_multiplier(m: Multiplier) -> Self {
        let a = m.abs();
        if a < SUPERATTRACTING_BOUND {
            Stability::Superattracting
        } else if (a - 1.0).abs() <= NEUTRAL_BAND {
            Stability::Neutral
        } else if a < 1.0 {
            Stability::Attracting
        } else {
            Stability::Repelling
        }
    }

    pub fn is_attracting(self) -> bool {
        matches!(self, Stability::Attracting | Stability::Superattracting)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleInfo {
    /// Cycle points in orbit order.
    pub points: Vec<CircleAngle>,
    pub period: usize,
    /// Lift winding: F^q(x) = x + 2π·winding.
    pub winding: i64,
    pub multiplier: Multiplier,
    pub stability: Stability,
    /// |F^q(x) − x − 2π·winding| at the first point.
    pub residual: f64,
    pub newton_iterations: usize,
    /// Newton polish failed and the root came from bisection alone.
    pub bisection_fallback: bool,
}

impl CycleInfo {
    /// Shortest circle distance from `theta` to any cycle point.
    pub fn distance_to(&self, theta: f64) -> f64 {
        self.points
            .iter()
            .map(|c| circle_distance(c.value(), theta))
            .fold(f64::INFINITY, f64::min)
    }

    /// Rotation type (p, q) in lowest terms with 0 ≤ p < q.
    pub fn rotation_type(&self) -> (i64, i64) {
        let q = self.period as i64;
        let g = gcd(self.winding.rem_euclid(q), q);
        (self.winding.rem_euclid(q) / g, q / g)
    }
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// F^q from `x`, tracking the reduced endpoint, whole turns, and f′ products.
struct LiftRun {
    end: f64,
    turns: i64,
    slope: f64,
    multiplier: Multiplier,
}

fn run_lift(alpha: f64, b: f64, x: f64, q: usize, with_multiplier: bool) -> LiftRun {
    let mut y = x;
    let mut turns = 0i64;
    let mut slope = 1.0;
    let mut multiplier = Multiplier::ONE;
    for _ in 0..q {
        let d = derivative_raw(b, y);
        slope *= d;
        if with_multiplier {
            multiplier = multiplier.times(d);
        }
        let next = lift_raw(alpha, b, y);
        let k = (next / TAU).round();
        y = next - TAU * k;
        turns += k as i64;
    }
    LiftRun {
        end: y,
        turns,
        slope,
        multiplier,
    }
}

/// G(x) and G′(x).
fn residual(alpha: f64, b: f64, x: f64, q: usize, winding: i64) -> (f64, f64) {
    let run = run_lift(alpha, b, x, q, false);
    (run.end - x + TAU * (run.turns - winding) as f64, run.slope - 1.0)
}

fn natural_winding(alpha: f64, b: f64, x: f64, q: usize) -> i64 {
    let run = run_lift(alpha, b, x, q, false);
    run.turns + ((run.end - x) / TAU).round() as i64
}

/// Smallest proper divisor d of q with F^d(x) ≈ x on the circle.
fn true_period(alpha: f64, b: f64, x: f64, q: usize) -> usize {
    let mut y = x;
    for d in 1..q {
        y = advance(alpha, b, y);
        if q % d == 0 && circle_distance(y, x) < PERIOD_TOL {
            return d;
        }
    }
    q
}

fn build_cycle(
    p: &Parameters,
    x: f64,
    q: usize,
    winding: i64,
    newton_iterations: usize,
    bisection_fallback: bool,
) -> CycleInfo {
    let (alpha, b) = (p.alpha(), p.b());
    let run = run_lift(alpha, b, x, q, true);
    let res = (run.end - x + TAU * (run.turns - winding) as f64).abs();
    let mut points = Vec::with_capacity(q);
    let mut y = x;
    for _ in 0..q {
        points.push(CircleAngle::new(y));
        y = advance(alpha, b, y);
    }
    CycleInfo {
        points,
        period: q,
        winding,
        multiplier: run.multiplier,
        stability: Stability::from_multiplier(run.multiplier),
        residual: res,
        newton_iterations,
        bisection_fallback,
    }
}

/// Newton polish inside [lo, hi]; `None` if it leaves the bracket or stalls.
fn newton_in_bracket(alpha: f64, b: f64, q: usize, winding: i64, start: f64, lo: f64, hi: f64) -> Option<(f64, usize)> {
    let mut x = start;
    for it in 1..=NEWTON_MAX_ITER {
        let (g, dg) = residual(alpha, b, x, q, winding);
        if g == 0.0 {
            return Some((x, it - 1));
        }
        if dg == 0.0 || !dg.is_finite() {
            return None;
        }
        let dx = g / dg;
        x -= dx;
        if !(lo..=hi).contains(&x) {
            return None;
        }
        if dx.abs() < NEWTON_TOL {
            return Some((x, it));
        }
    }
    None
}

/// Bisection on a bracket with G(lo)·G(hi) < 0 until the width is `tol`.
fn bisect(alpha: f64, b: f64, q: usize, winding: i64, mut lo: f64, mut hi: f64, g_lo: f64, tol: f64) -> (f64, f64) {
    let lo_negative = g_lo < 0.0;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (g, _) = residual(alpha, b, mid, q, winding);
        if g == 0.0 {
            return (mid, mid);
        }
        if (g < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// All cycles of exact period `q` and lift winding `winding`.
///
/// Roots of G whose true period is a proper divisor of `q` are skipped; they
/// are returned when querying that divisor. At b = 0 the map is a rigid
/// rotation, G is constant, and there are no isolated roots.
pub fn find_cycles(p: &Parameters, q: usize, winding: i64) -> Result<Vec<CycleInfo>> {
    if q == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    if p.b() == 0.0 {
        return Ok(Vec::new());
    }
    let (alpha, b) = (p.alpha(), p.b());
    let n = (64 * q).max(1024);
    let h = TAU / n as f64;
    // Grid offset by half a cell so that ±π, where the canonical reduction
    // jumps, is never a grid point.
    let grid: Vec<f64> = (0..=n).map(|i| -PI + (i as f64 + 0.5) * h).collect();
    let values: Vec<f64> = grid.iter().map(|&x| residual(alpha, b, x, q, winding).0).collect();

    let mut roots: Vec<(f64, usize, bool)> = Vec::new();
    for i in 0..n {
        let (x0, x1, g0, g1) = (grid[i], grid[i + 1], values[i], values[i + 1]);
        if g0 == 0.0 {
            roots.push((x0, 0, false));
            continue;
        }
        if g0 * g1 >= 0.0 {
            continue;
        }
        let (lo, hi) = bisect(alpha, b, q, winding, x0, x1, g0, BISECT_HANDOFF);
        let root = match newton_in_bracket(alpha, b, q, winding, 0.5 * (lo + hi), x0, x1) {
            Some((x, it)) => (x, it, false),
            None => {
                let (lo, hi) = bisect(alpha, b, q, winding, x0, x1, g0, 0.0);
                (0.5 * (lo + hi), NEWTON_MAX_ITER, true)
            }
        };
        roots.push(root);
    }

    let mut cycles: Vec<CycleInfo> = Vec::new();
    let mut seen: Vec<f64> = Vec::new();
    for (x, iterations, fallback) in roots {
        if seen.iter().any(|&s| circle_distance(s, x) < MERGE_TOL) {
            continue;
        }
        seen.push(x);
        if cycles.iter().any(|c| c.distance_to(x) < PERIOD_TOL) {
            continue;
        }
        if true_period(alpha, b, x, q) < q {
            continue;
        }
        cycles.push(build_cycle(p, x, q, winding, iterations, fallback));
    }
    Ok(cycles)
}

/// Polish a cycle guess by Newton's method on its first point. The length of
/// `approx` is the claimed period.
pub fn refine_cycle(p: &Parameters, approx: &[CircleAngle]) -> Result<CycleInfo> {
    let first = approx
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty cycle guess".into()))?;
    let q = approx.len();
    let (alpha, b) = (p.alpha(), p.b());
    let mut x = first.value();
    let winding = natural_winding(alpha, b, x, q);
    let mut iterations = 0;
    let mut g = f64::INFINITY;
    for it in 1..=NEWTON_MAX_ITER {
        let (gx, dg) = residual(alpha, b, x, q, winding);
        g = gx;
        if gx == 0.0 {
            break;
        }
        if dg == 0.0 || !dg.is_finite() {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: gx.abs(),
            });
        }
        let dx = (gx / dg).clamp(-NEWTON_MAX_STEP, NEWTON_MAX_STEP);
        x -= dx;
        iterations = it;
        if dx.abs() < NEWTON_TOL {
            g = residual(alpha, b, x, q, winding).0;
            break;
        }
    }
    if !(g.abs() < RESIDUAL_TOL) {
        return Err(Error::NoConvergence {
            iterations,
            residual: g.abs(),
        });
    }
    let actual = true_period(alpha, b, x, q);
    if actual < q {
        return Err(Error::PeriodMismatch { claimed: q, actual });
    }
    let winding = natural_winding(alpha, b, x, q);
    Ok(build_cycle(p, x, q, winding, iterations, false))
}
