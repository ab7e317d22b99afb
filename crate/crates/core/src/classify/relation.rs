//! Critical relations: parameters at which a critical point is periodic.
//!
//! The relation (c, n) holds when fⁿ(f(c)) = c. It defines a curve in the
//! (α, b) plane; two relations on different critical points meet at isolated
//! parameters where both critical orbits are superattracting cycles.

use std::f64::consts::PI;

use serde::Serialize;

use super::{classify_parameter, Classification, ClassifyBudget, Verdict};
use crate::cycles::{refine_cycle, CycleInfo};
use crate::error::{Error, Result};
use crate::map::{
    advance, critical_angle_raw, derivative_raw, wrap_symmetric, CircleAngle, CriticalBranch, Parameters,
};

/// Points in the initial α scan of a bracket.
const SCAN_POINTS: usize = 4096;
const RELATION_TOL: f64 = 1e-9;
const TWO_RELATION_TOL: f64 = 1e-8;
const LOCUS_B_TOL: f64 = 1e-10;
const CORRECTOR_MAX_ITER: usize = 40;
/// Largest α correction accepted in one continuation step.
const CORRECTOR_MAX_JUMP: f64 = 0.1;

/// fⁿ(f(c)) = c for the critical point c on `which`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CriticalRelation {
    pub which: CriticalBranch,
    pub n: usize,
}

/// Signed circle displacement from c to fⁿ(v), together with its
/// α-derivative (c does not depend on α).
pub fn relation_residual(alpha: f64, b: f64, rel: CriticalRelation) -> (f64, f64) {
    let c = critical_angle_raw(b, rel.which);
    let mut x = c;
    let mut dx = 0.0;
    for _ in 0..=rel.n {
        dx = 1.0 + derivative_raw(b, x) * dx;
        x = advance(alpha, b, x);
    }
    (wrap_symmetric(x - c), dx)
}

fn require_critical(b: f64) -> Result<()> {
    if b < 1.0 {
        Err(Error::Domain(format!("no critical points for b = {b} < 1")))
    } else {
        Ok(())
    }
}

/// Bisection on α for a sign change of the relation residual.
fn bisect_alpha(b: f64, rel: CriticalRelation, mut lo: f64, mut hi: f64, h_lo: f64) -> f64 {
    let lo_negative = h_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * lo.abs().max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        let h = relation_residual(mid, b, rel).0;
        if h == 0.0 {
            return mid;
        }
        if (h < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationHit {
    pub params: Parameters,
    pub residual: f64,
    /// The superattracting cycle through the critical point.
    pub cycle: CycleInfo,
}

/// The superattracting cycle through c at a relation parameter.
fn cycle_through_critical(p: &Parameters, rel: CriticalRelation) -> Result<CycleInfo> {
    let mut x = critical_angle_raw(p.b(), rel.which);
    let mut guess = Vec::with_capacity(rel.n + 1);
    for _ in 0..=rel.n {
        guess.push(CircleAngle::new(x));
        x = advance(p.alpha(), p.b(), x);
    }
    match refine_cycle(p, &guess) {
        Err(Error::PeriodMismatch { actual, .. }) => refine_cycle(p, &guess[..actual]),
        other => other,
    }
}

/// First α in `bracket` (scan order) at which the relation holds, for fixed b.
///
/// The residual is a signed circle distance, so it also flips sign where it
/// wraps through ±π; those crossings are discarded after bisection.
pub fn find_critical_relation(p: &Parameters, rel: CriticalRelation, bracket: (f64, f64)) -> Result<RelationHit> {
    let b = p.b();
    require_critical(b)?;
    let (lo, hi) = bracket;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("empty bracket [{lo}, {hi}]")));
    }
    let xs: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN_POINTS as f64)
        .collect();
    let hs: Vec<f64> = xs.iter().map(|&a| relation_residual(a, b, rel).0).collect();
    for i in 0..SCAN_POINTS {
        let root = if hs[i] == 0.0 {
            xs[i]
        } else if hs[i] * hs[i + 1] < 0.0 && hs[i].abs() + hs[i + 1].abs() < PI {
            bisect_alpha(b, rel, xs[i], xs[i + 1], hs[i])
        } else {
            continue;
        };
        let residual = relation_residual(root, b, rel).0.abs();
        if residual < RELATION_TOL {
            let params = Parameters::new(root, b)?;
            let cycle = cycle_through_critical(&params, rel)?;
            return Ok(RelationHit {
                params,
                residual,
                cycle,
            });
        }
    }
    if hs[SCAN_POINTS] == 0.0 {
        let params = Parameters::new(hi, b)?;
        let cycle = cycle_through_critical(&params, rel)?;
        return Ok(RelationHit {
            params,
            residual: 0.0,
            cycle,
        });
    }
    Err(Error::NoSignChange { lo, hi })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Up,
    Down,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuationSettings {
    /// Step in b along the locus.
    pub step: f64,
    /// Steps taken in each direction before giving up.
    pub max_steps: usize,
    pub direction: Direction,
    pub budget: ClassifyBudget,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            step: 1e-4,
            max_steps: 20_000,
            direction: Direction::Both,
            budget: ClassifyBudget::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoRelationHit {
    pub params: Parameters,
    pub residual1: f64,
    pub residual2: f64,
    /// Locus points visited before the hit.
    pub steps: usize,
    pub classification: Classification,
}

/// Newton on α for relation 1 at fixed b, starting from `guess`.
fn correct_alpha(b: f64, rel: CriticalRelation, guess: f64) -> Option<f64> {
    let mut a = guess;
    for _ in 0..CORRECTOR_MAX_ITER {
        let (h, dh) = relation_residual(a, b, rel);
        if h.abs() < 1e-13 {
            break;
        }
        if dh == 0.0 || !dh.is_finite() {
            return None;
        }
        let da = h / dh;
        a -= da;
        if da.abs() < 1e-15 {
            break;
        }
    }
    let ok = relation_residual(a, b, rel).0.abs() < RELATION_TOL && (a - guess).abs() < CORRECTOR_MAX_JUMP;
    ok.then_some(a)
}

/// One branch of the locus walked in a fixed b direction.
struct Branch {
    sign: f64,
    b: f64,
    alpha: f64,
    prev_alpha: f64,
    r2: f64,
    alive: bool,
    stalled: bool,
}

enum StepOutcome {
    Continue,
    Hit(Parameters, f64, f64),
}

/// Bisection in b between two locus points that bracket a relation-2 root.
fn bisect_locus(
    rel1: CriticalRelation,
    rel2: CriticalRelation,
    (mut b_lo, mut a_lo, r_lo): (f64, f64, f64),
    (mut b_hi, mut a_hi): (f64, f64),
) -> Option<(Parameters, f64, f64)> {
    let lo_negative = r_lo < 0.0;
    while (b_hi - b_lo).abs() > LOCUS_B_TOL {
        let b_mid = 0.5 * (b_lo + b_hi);
        let a_mid = correct_alpha(b_mid, rel1, 0.5 * (a_lo + a_hi))?;
        let r = relation_residual(a_mid, b_mid, rel2).0;
        if r == 0.0 {
            (b_lo, a_lo, b_hi, a_hi) = (b_mid, a_mid, b_mid, a_mid);
            break;
        }
        if (r < 0.0) == lo_negative {
            (b_lo, a_lo) = (b_mid, a_mid);
        } else {
            (b_hi, a_hi) = (b_mid, a_mid);
        }
    }
    let b = 0.5 * (b_lo + b_hi);
    let a = correct_alpha(b, rel1, 0.5 * (a_lo + a_hi))?;
    let r1 = relation_residual(a, b, rel1).0.abs();
    let r2 = relation_residual(a, b, rel2).0.abs();
    if r1 < TWO_RELATION_TOL && r2 < TWO_RELATION_TOL {
        Parameters::new(a, b).ok().map(|p| (p, r1, r2))
    } else {
        None
    }
}

impl Branch {
    fn step(&mut self, settings: &ContinuationSettings, rel1: CriticalRelation, rel2: CriticalRelation) -> StepOutcome {
        let b_new = self.b + self.sign * settings.step;
        if b_new <= 1.0 {
            self.alive = false;
            return StepOutcome::Continue;
        }
        let predicted = self.alpha + (self.alpha - self.prev_alpha);
        let Some(a_new) = correct_alpha(b_new, rel1, predicted) else {
            self.alive = false;
            self.stalled = true;
            return StepOutcome::Continue;
        };
        let r_new = relation_residual(a_new, b_new, rel2).0;
        let crossing = (r_new == 0.0 || self.r2 * r_new < 0.0) && self.r2.abs() + r_new.abs() < PI;
        let outcome = if crossing {
            match bisect_locus(rel1, rel2, (self.b, self.alpha, self.r2), (b_new, a_new)) {
                Some((p, r1, r2)) => StepOutcome::Hit(p, r1, r2),
                None => StepOutcome::Continue,
            }
        } else {
            StepOutcome::Continue
        };
        self.prev_alpha = self.alpha;
        self.alpha = a_new;
        self.b = b_new;
        self.r2 = r_new;
        outcome
    }
}

/// Walk the locus of `relation1` through `p0`, parametrised by b with α
/// re-corrected after every step, until `relation2` also holds at a
/// parameter that classifies as hyperbolic.
///
/// With [`Direction::Both`] the two directions are advanced alternately, so
/// the hit nearest to `p0` in step count wins (ties go upward).
pub fn find_second_relation(
    p0: &Parameters,
    relation1: CriticalRelation,
    relation2: CriticalRelation,
    settings: &ContinuationSettings,
) -> Result<TwoRelationHit> {
    require_critical(p0.b())?;
    if !(settings.step > 0.0) {
        return Err(Error::InvalidArgument("continuation step must be positive".into()));
    }
    let (h1, _) = relation_residual(p0.alpha(), p0.b(), relation1);
    if h1.abs() >= RELATION_TOL {
        return Err(Error::InvalidArgument(format!(
            "starting parameter is off the first relation (residual {h1:e})"
        )));
    }
    let budget = settings.budget;
    if relation1 == relation2 {
        let (r2, _) = relation_residual(p0.alpha(), p0.b(), relation2);
        return Ok(TwoRelationHit {
            params: *p0,
            residual1: h1.abs(),
            residual2: r2.abs(),
            steps: 0,
            classification: classify_parameter(p0, &budget),
        });
    }

    let r2_start = relation_residual(p0.alpha(), p0.b(), relation2).0;
    let signs: &[f64] = match settings.direction {
        Direction::Up => &[1.0],
        Direction::Down => &[-1.0],
        Direction::Both => &[1.0, -1.0],
    };
    let mut branches: Vec<Branch> = signs
        .iter()
        .map(|&sign| Branch {
            sign,
            b: p0.b(),
            alpha: p0.alpha(),
            prev_alpha: p0.alpha(),
            r2: r2_start,
            alive: true,
            stalled: false,
        })
        .collect();

    for k in 1..=settings.max_steps {
        for branch in branches.iter_mut().filter(|br| br.alive) {
            if let StepOutcome::Hit(params, residual1, residual2) = branch.step(settings, relation1, relation2) {
                let classification = classify_parameter(&params, &budget);
                if classification.verdict == Verdict::Hyperbolic {
                    return Ok(TwoRelationHit {
                        params,
                        residual1,
                        residual2,
                        steps: k,
                        classification,
                    });
                }
            }
        }
        if branches.iter().all(|br| !br.alive) {
            break;
        }
    }

    if let Some(br) = branches.iter().find(|br| br.stalled) {
        return Err(Error::ContinuationStall { b: br.b });
    }
    let b_lo = branches.iter().map(|br| br.b).fold(p0.b(), f64::min);
    let b_hi = branches.iter().map(|br| br.b).fold(p0.b(), f64::max);
    Err(Error::NoSecondRelation { b_lo, b_hi })
}
