use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{classify_parameter, Classification, ClassifyBudget, Verdict};
use crate::error::{Error, Result};
use crate::map::Parameters;

/// 1/g and 1/g² for the plastic number g, the generators of the R2
/// low-discrepancy sequence.
const R2_STEP: [f64; 2] = [0.754_877_666_246_692_8, 0.569_840_290_998_053_3];
/// Samples classified per parallel batch.
const BATCH: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchResult {
    pub found: Option<Parameters>,
    pub samples_tried: usize,
    /// max(|Δα|, |Δb|) from the starting parameter; 0 when nothing was found.
    pub distance: f64,
    #[serde(skip)]
    pub classification: Option<Classification>,
}

/// Sample `index` of the seeded sequence. Index 0 is the unperturbed
/// parameter; later indices follow an R2 sequence with a random shift drawn
/// from `seed`, mapped onto [α ± ε] × [b_lo, b_hi].
fn sample(p: &Parameters, eps: f64, b_lo: f64, b_hi: f64, shift: [f64; 2], index: usize) -> Option<Parameters> {
    if index == 0 {
        return Some(*p);
    }
    let u = (shift[0] + index as f64 * R2_STEP[0]).fract();
    let v = (shift[1] + index as f64 * R2_STEP[1]).fract();
    let alpha = p.alpha() + eps * (2.0 * u - 1.0);
    let b = b_lo + (b_hi - b_lo) * v;
    if b <= 1.0 {
        return None;
    }
    let q = Parameters::new(alpha, b).ok()?;
    (q.distance(p) < eps).then_some(q)
}

/// Search the box [α ± ε] × [b ± ε] ∩ {b > 1} in a fixed seeded order for
/// the first parameter whose classification satisfies `accept`.
///
/// Samples are classified in parallel batches, but the returned hit is
/// always the earliest in sample order, so the result does not depend on the
/// number of worker threads.
pub fn search_nearby<F>(
    p: &Parameters,
    epsilon: f64,
    max_samples: usize,
    seed: u64,
    budget: &ClassifyBudget,
    accept: F,
) -> Result<SearchResult>
where
    F: Fn(&Classification) -> bool + Sync,
{
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let b_lo = (p.b() - epsilon).max(1.0);
    let b_hi = p.b() + epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = [rng.gen::<f64>(), rng.gen::<f64>()];

    let mut start = 0;
    while start < max_samples {
        let end = (start + BATCH).min(max_samples);
        let hit = (start..end)
            .into_par_iter()
            .map(|i| {
                let q = sample(p, epsilon, b_lo, b_hi, shift, i)?;
                let c = classify_parameter(&q, budget);
                accept(&c).then_some((i, q, c))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .next();
        if let Some((i, q, c)) = hit {
            return Ok(SearchResult {
                found: Some(q),
                samples_tried: i + 1,
                distance: q.distance(p),
                classification: Some(c),
            });
        }
        start = end;
    }
    Ok(SearchResult {
        found: None,
        samples_tried: max_samples,
        distance: 0.0,
        classification: None,
    })
}

/// The first hyperbolic parameter within ε of `p` in seeded low-discrepancy
/// order, classified with the default budget.
pub fn find_hyperbolic_nearby(p: &Parameters, epsilon: f64, max_samples: usize, seed: u64) -> Result<SearchResult> {
    search_nearby(p, epsilon, max_samples, seed, &ClassifyBudget::default(), |c| {
        c.verdict == Verdict::Hyperbolic
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, b: f64) -> Parameters {
        Parameters::new(alpha, b).unwrap()
    }

    #[test]
    fn already_hyperbolic_is_returned_unchanged() {
        let p = params(0.0, 1.9);
        let r = find_hyperbolic_nearby(&p, 0.05, 200, 1).unwrap();
        assert_eq!(r.found, Some(p));
        assert_eq!(r.samples_tried, 1);
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn finds_hyperbolic_near_period_doubling() {
        let p = params(0.0, 2.0);
        let r = find_hyperbolic_nearby(&p, 0.05, 200, 1).unwrap();
        let q = r.found.expect("a hyperbolic parameter nearby");
        assert!(r.distance < 0.05);
        assert_eq!(
            classify_parameter(&q, &ClassifyBudget::default()).verdict,
            Verdict::Hyperbolic
        );
    }

    #[test]
    fn brute_force_grid_confirms_hyperbolic_parameters_exist() {
        let budget = ClassifyBudget {
            transient: 4000,
            ..ClassifyBudget::default()
        };
        let mut hits = 0;
        for i in 0..100 {
            for j in 0..100 {
                let alpha = -0.05 + 0.1 * (i as f64 + 0.5) / 100.0;
                let b = 1.95 + 0.1 * (j as f64 + 0.5) / 100.0;
                if classify_parameter(&params(alpha, b), &budget).verdict == Verdict::Hyperbolic {
                    hits += 1;
                }
            }
        }
        assert!(hits > 0);
    }

    #[test]
    fn tiny_box_exhausts_budget() {
        let r = find_hyperbolic_nearby(&params(0.0, 2.0), 1e-12, 10, 3).unwrap();
        assert!(r.found.is_none());
        assert_eq!(r.samples_tried, 10);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let p = params(1.3, 2.8);
        let a = find_hyperbolic_nearby(&p, 0.05, 200, 42).unwrap();
        let b = find_hyperbolic_nearby(&p, 0.05, 200, 42).unwrap();
        assert_eq!(a.found, b.found);
        assert_eq!(a.samples_tried, b.samples_tried);
    }

    #[test]
    fn samples_stay_in_box() {
        let p = params(3.1, 1.01);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shift = [rng.gen::<f64>(), rng.gen::<f64>()];
        for i in 1..1000 {
            if let Some(q) = sample(&p, 0.05, 1.0, 1.06, shift, i) {
                assert!(q.distance(&p) < 0.05);
                assert!(q.b() > 1.0);
            }
        }
        assert!(search_nearby(&p, 0.0, 10, 0, &ClassifyBudget::default(), |_| true).is_err());
    }
}
