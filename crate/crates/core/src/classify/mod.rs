//! Hyperbolicity of a parameter, judged by where its critical orbits go, and
//! searches for nearby hyperbolic parameters and critical relations.

mod relation;
mod search;

pub use relation::{
    find_critical_relation, find_second_relation, relation_residual, ContinuationSettings, CriticalRelation, Direction,
    RelationHit, TwoRelationHit,
};
pub use search::{find_hyperbolic_nearby, search_nearby, SearchResult};

use serde::Serialize;

use crate::cycles::{refine_cycle, CycleInfo, Stability};
use crate::error::Error;
use crate::map::{advance, circle_distance, critical_angle_raw, CircleAngle, CriticalBranch, Parameters};

/// Recurrence tolerance used after the strict pass fails, only to recognise
/// orbits creeping towards a neutral cycle.
const LOOSE_TOL: f64 = 1e-3;
/// First checkpoint; later ones are 4× apart, capped by the transient.
const FIRST_CHECKPOINT: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassifyBudget {
    /// Iterations before cycle detection gives its final answer.
    pub transient: usize,
    /// Largest period looked for.
    pub q_max: usize,
    /// Recurrence tolerance.
    pub tol: f64,
}

impl Default for ClassifyBudget {
    fn default() -> Self {
        Self {
            transient: 20_000,
            q_max: 128,
            tol: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    SubcriticalLocked { p: i64, q: i64 },
    SubcriticalUnresolved,
    Hyperbolic,
    NeutralSuspected,
    Undetected,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::SubcriticalLocked { .. } => "SubcriticalLocked",
            Verdict::SubcriticalUnresolved => "SubcriticalUnresolved",
            Verdict::Hyperbolic => "Hyperbolic",
            Verdict::NeutralSuspected => "NeutralSuspected",
            Verdict::Undetected => "Undetected",
        }
    }
}

/// Where one tracked orbit ended up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrbitFate {
    Attracted,
    Neutral,
    Undetected,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Attracting limit cycles, one per attracted orbit (possibly repeated).
    pub cycles: Vec<CycleInfo>,
    /// Fate of each tracked orbit: both critical orbits for b > 1, the
    /// orbit of θ₀ = π otherwise.
    pub fates: Vec<OrbitFate>,
    /// Total map iterations spent.
    pub budget_used: usize,
}

impl Classification {
    pub fn attracted_orbits(&self) -> usize {
        self.fates.iter().filter(|f| **f == OrbitFate::Attracted).count()
    }
}

struct Tracked {
    fate: OrbitFate,
    cycle: Option<CycleInfo>,
    steps: usize,
}

fn checkpoints(transient: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut c = FIRST_CHECKPOINT;
    while c < transient {
        out.push(c);
        c *= 4;
    }
    out.push(transient);
    out
}

/// Smallest q ≤ q_max with |θ_{j+q} − θ_j| < tol for j = 0..=3q.
fn detect_period(window: &[f64], q_max: usize, tol: f64) -> Option<usize> {
    (1..=q_max).find(|&q| 4 * q < window.len() && (0..=3 * q).all(|j| circle_distance(window[j + q], window[j]) < tol))
}

/// Refine a detected recurrence into a cycle, following a reported smaller
/// true period once.
fn refine_detected(p: &Parameters, window: &[f64], q: usize) -> Option<CycleInfo> {
    let guess: Vec<CircleAngle> = window[..q].iter().map(|&x| CircleAngle::new(x)).collect();
    match refine_cycle(p, &guess) {
        Ok(c) => Some(c),
        Err(Error::PeriodMismatch { actual, .. }) => {
            let guess: Vec<CircleAngle> = window[..actual].iter().map(|&x| CircleAngle::new(x)).collect();
            refine_cycle(p, &guess).ok()
        }
        Err(_) => None,
    }
}

fn track_orbit(p: &Parameters, seed: f64, budget: &ClassifyBudget) -> Tracked {
    let (alpha, b) = (p.alpha(), p.b());
    let q_max = budget.q_max.max(1);
    let window_len = 4 * q_max + 1;
    let mut window = Vec::with_capacity(window_len);
    let mut x = seed;
    let mut steps = 0usize;

    let fill = |x: f64, window: &mut Vec<f64>| {
        window.clear();
        let mut y = x;
        for _ in 0..window_len {
            window.push(y);
            y = advance(alpha, b, y);
        }
    };

    for cp in checkpoints(budget.transient) {
        while steps < cp {
            x = advance(alpha, b, x);
            steps += 1;
        }
        fill(x, &mut window);
        let Some(q) = detect_period(&window, q_max, budget.tol) else {
            continue;
        };
        match refine_detected(p, &window, q) {
            Some(c) if c.stability.is_attracting() => {
                return Tracked {
                    fate: OrbitFate::Attracted,
                    cycle: Some(c),
                    steps: steps + window_len,
                };
            }
            Some(c) if c.stability == Stability::Neutral => {
                return Tracked {
                    fate: OrbitFate::Neutral,
                    cycle: Some(c),
                    steps: steps + window_len,
                };
            }
            // Repelling: the orbit is shadowing an unstable cycle.
            _ => {}
        }
    }

    if let Some(q) = detect_period(&window, q_max, LOOSE_TOL.max(budget.tol)) {
        if let Some(c) = refine_detected(p, &window, q) {
            if c.stability == Stability::Neutral {
                return Tracked {
                    fate: OrbitFate::Neutral,
                    cycle: Some(c),
                    steps: steps + window_len,
                };
            }
        }
    }
    Tracked {
        fate: OrbitFate::Undetected,
        cycle: None,
        steps: steps + window_len,
    }
}

/// Classify one parameter by following its critical orbits (b > 1) or the
/// orbit of θ₀ = π (b ≤ 1; at b = 1 this is the degenerate critical point).
///
/// Each orbit is iterated up to `budget.transient` steps, with recurrence
/// checks at a fixed checkpoint schedule. A recurrence of period q must hold
/// for 3q consecutive steps and then survive Newton refinement as a cycle
/// before it counts.
pub fn classify_parameter(p: &Parameters, budget: &ClassifyBudget) -> Classification {
    let b = p.b();
    if b <= 1.0 {
        // π is the minimum of f′ (the degenerate critical point at b = 1).
        // θ₀ = 0 would sit on the repelling fixed point whenever α = 0.
        let seed = critical_angle_raw(1.0, CriticalBranch::First);
        let t = track_orbit(p, seed, budget);
        let verdict = match (&t.fate, &t.cycle) {
            (OrbitFate::Attracted, Some(c)) => {
                let (p, q) = c.rotation_type();
                Verdict::SubcriticalLocked { p, q }
            }
            (OrbitFate::Neutral, _) => Verdict::NeutralSuspected,
            _ => Verdict::SubcriticalUnresolved,
        };
        return Classification {
            verdict,
            cycles: t.cycle.filter(|c| c.stability.is_attracting()).into_iter().collect(),
            fates: vec![t.fate],
            budget_used: t.steps,
        };
    }

    let tracked: Vec<Tracked> = [CriticalBranch::First, CriticalBranch::Second]
        .into_iter()
        .map(|branch| track_orbit(p, critical_angle_raw(b, branch), budget))
        .collect();
    let fates: Vec<OrbitFate> = tracked.iter().map(|t| t.fate).collect();
    let verdict = if fates.contains(&OrbitFate::Undetected) {
        Verdict::Undetected
    } else if fates.contains(&OrbitFate::Neutral) {
        Verdict::NeutralSuspected
    } else {
        Verdict::Hyperbolic
    };
    let budget_used = tracked.iter().map(|t| t.steps).sum();
    let cycles = tracked
        .into_iter()
        .filter(|t| t.fate == OrbitFate::Attracted)
        .filter_map(|t| t.cycle)
        .collect();
    Classification {
        verdict,
        cycles,
        fates,
        budget_used,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(alpha: f64, b: f64) -> Parameters {
        Parameters::new(alpha, b).unwrap()
    }

    #[test]
    fn locked_subcritical() {
        let c = classify_parameter(&params(0.0, 0.5), &ClassifyBudget::default());
        assert_eq!(c.verdict, Verdict::SubcriticalLocked { p: 0, q: 1 });
        assert!(c.cycles[0].distance_to(PI) < 1e-9);
    }

    #[test]
    fn period_doubling_point_is_neutral() {
        let c = classify_parameter(&params(0.0, 2.0), &ClassifyBudget::default());
        assert_eq!(c.verdict, Verdict::NeutralSuspected);
    }

    #[test]
    fn both_critical_orbits_reach_pi() {
        // Independent check: iterate each critical orbit 10⁶ steps directly.
        let b: f64 = 1.9;
        for s in [1.0, -1.0] {
            let mut x = s * (-1.0 / b).acos();
            for _ in 0..1_000_000 {
                x = x + b * x.sin();
            }
            assert!(circle_distance(x, PI) < 1e-12);
        }
        let c = classify_parameter(&params(0.0, b), &ClassifyBudget::default());
        assert_eq!(c.verdict, Verdict::Hyperbolic);
        assert_eq!(c.cycles.len(), 2);
        for cyc in &c.cycles {
            assert!(cyc.distance_to(PI) < 1e-9);
            assert!((cyc.multiplier.value() + 0.9).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_critical_line() {
        let c = classify_parameter(&params(0.0, 1.0), &ClassifyBudget::default());
        assert_eq!(c.verdict, Verdict::SubcriticalLocked { p: 0, q: 1 });
        assert_eq!(c.cycles[0].stability, Stability::Superattracting);
    }

    #[test]
    fn tongue_boundary_verdicts() {
        let budget = ClassifyBudget {
            q_max: 1,
            ..ClassifyBudget::default()
        };
        for alpha in [0.49, -0.49] {
            let c = classify_parameter(&params(alpha, 0.5), &budget);
            assert_eq!(c.verdict, Verdict::SubcriticalLocked { p: 0, q: 1 }, "alpha {alpha}");
        }
        for alpha in [0.51, -0.51, 0.612] {
            let c = classify_parameter(&params(alpha, 0.5), &budget);
            assert_eq!(c.verdict, Verdict::SubcriticalUnresolved, "alpha {alpha}");
        }
    }

    #[test]
    fn rigid_rotations() {
        // Rational rotation: every orbit is a neutral 4-cycle.
        let c = classify_parameter(&params(PI / 2.0, 0.0), &ClassifyBudget::default());
        assert_eq!(c.verdict, Verdict::NeutralSuspected);
        let c = classify_parameter(&params(1.0, 0.0), &ClassifyBudget::default());
        assert_eq!(c.verdict, Verdict::SubcriticalUnresolved);
    }

    #[test]
    fn checkpoint_schedule() {
        assert_eq!(checkpoints(20_000), vec![256, 1024, 4096, 16384, 20_000]);
        assert_eq!(checkpoints(100), vec![100]);
        assert_eq!(checkpoints(0), vec![0]);
    }

    #[test]
    fn verdict_is_equivariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let budget = ClassifyBudget {
            transient: 4000,
            ..ClassifyBudget::default()
        };
        for _ in 0..1000 {
            let p = params(rng.gen_range(-PI..PI), rng.gen_range(0.0..4.0));
            let a = classify_parameter(&p, &budget);
            let m = classify_parameter(&p.mirrored(), &budget);
            let mirrored = match a.verdict {
                Verdict::SubcriticalLocked { p, q } => Verdict::SubcriticalLocked { p: (q - p) % q, q },
                v => v,
            };
            assert_eq!(mirrored, m.verdict, "{p}");
        }
    }

    #[test]
    fn hyperbolic_orbits_stay_on_their_cycles() {
        let budget = ClassifyBudget::default();
        let mut checked = 0;
        for (alpha, b) in [(0.0, 1.9), (2.5, 3.9), (-2.0, 1.5), (1.0, 2.7), (0.3, 1.3)] {
            let p = params(alpha, b);
            let c = classify_parameter(&p, &budget);
            if c.verdict != Verdict::Hyperbolic {
                continue;
            }
            checked += 1;
            for (branch, cyc) in [CriticalBranch::First, CriticalBranch::Second]
                .into_iter()
                .zip(&c.cycles)
            {
                let mut x = critical_angle_raw(b, branch);
                for _ in 0..budget.transient {
                    x = advance(alpha, b, x);
                }
                let mut worst: f64 = 0.0;
                for _ in 0..100_000 {
                    x = advance(p.alpha(), b, x);
                    worst = worst.max(cyc.distance_to(x));
                }
                assert!(worst < 10.0 * budget.tol, "{p}: drifted {worst}");
            }
        }
        assert!(checked >= 2);
    }
}
