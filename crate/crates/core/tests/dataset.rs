use arnold_lab::classify::{classify_parameter, ClassifyBudget, Verdict};
use arnold_lab::dataset::*;
use arnold_lab::Parameters;

fn default_dataset() -> OrbitsDataset {
    let p0 = Parameters::new(DEFAULT_ALPHA, DEFAULT_B).unwrap();
    let cycle = default_cycle(&p0).unwrap();
    generate_orbits_dataset(&p0, &cycle, DEFAULT_OFFSETS, DEFAULT_LENGTHS, DEFAULT_SEED).unwrap()
}

#[test]
fn default_pipeline() {
    let d = default_dataset();
    assert_eq!(d.segments.len(), 3);
    let sizes = &d.perturbation_sizes;
    assert_eq!(sizes.len(), 2);
    assert!(sizes[0] < 1e-5 && sizes[1] < sizes[0] && sizes[1] > 0.0, "{sizes:?}");

    // Segment 1: the two orbits separate.
    let s1 = &d.segments[0];
    assert!(s1.orbit1.iter().zip(&s1.orbit2).any(|(a, b)| a.distance(*b) > 0.5));

    // The first perturbation has exactly one attracted critical orbit.
    let budget = ClassifyBudget::default();
    assert_eq!(classify_parameter(&d.segments[1].params, &budget).attracted_orbits(), 1);

    // The final parameter is hyperbolic and both orbits settle on its cycles.
    let last = &d.segments[2];
    let c = classify_parameter(&last.params, &budget);
    assert_eq!(c.verdict, Verdict::Hyperbolic);
    for orbit in [&last.orbit1, &last.orbit2] {
        for theta in &orbit[orbit.len() - 100..] {
            let d = c
                .cycles
                .iter()
                .map(|cy| cy.distance_to(theta.value()))
                .fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6, "tail point {} is {d:e} from the cycles", theta.value());
        }
    }
}

#[test]
fn continues_across_segments_and_is_deterministic() {
    let d = default_dataset();
    for w in d.segments.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let last = *a.orbit1.last().unwrap();
        let next = arnold_lab::map::step(&b.params, last);
        assert_eq!(next, b.orbit1[0]);
    }
    assert_eq!(d, default_dataset());
}
