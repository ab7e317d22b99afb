//! Two orbits started near a repelling cycle, followed through two tiny
//! parameter perturbations: first to a map with one attracted critical orbit,
//! then to a hyperbolic one.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::classify::{search_nearby, ClassifyBudget, Verdict};
use crate::cycles::{find_cycles, CycleInfo, Stability};
use crate::error::{Error, Result};
use crate::map::{advance, CircleAngle, Parameters};

/// Default start: b = 3 with α chosen so both critical orbits wander
/// (no attracting cycle is detected), while tiny windows lie within 10⁻⁵.
pub const DEFAULT_ALPHA: f64 = 0.4804;
pub const DEFAULT_B: f64 = 3.0;
pub const DEFAULT_OFFSETS: (f64, f64) = (1e-4, -1e-4);
pub const DEFAULT_LENGTHS: [usize; 3] = [200, 2000, 40_000];
pub const DEFAULT_SEED: u64 = 1;
pub const FIRST_EPSILON: f64 = 1e-5;
pub const MAX_OFFSET: f64 = 1e-3;
/// Samples per perturbation search.
pub const SEARCH_SAMPLES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SegmentLabel {
    Unstable,
    AfterFirstPerturbation,
    AfterSecondPerturbation,
}

impl SegmentLabel {
    pub fn name(&self) -> &'static str {
        match self {
            SegmentLabel::Unstable => "unstable",
            SegmentLabel::AfterFirstPerturbation => "after-first-perturbation",
            SegmentLabel::AfterSecondPerturbation => "after-second-perturbation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub params: Parameters,
    pub label: SegmentLabel,
    pub orbit1: Vec<CircleAngle>,
    pub orbit2: Vec<CircleAngle>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OrbitsDataset {
    pub segments: Vec<Segment>,
    /// max(|Δα|, |Δb|) of each perturbation.
    pub perturbation_sizes: Vec<f64>,
}

impl OrbitsDataset {
    pub fn rows(&self) -> usize {
        self.segments.iter().map(|s| s.orbit1.len()).sum()
    }
}

/// The repelling fixed point used by default: the first repelling cycle of
/// period 1 at (α, b).
pub fn default_cycle(p: &Parameters) -> Result<CycleInfo> {
    find_cycles(p, 1, 0)?
        .into_iter()
        .find(|c| c.stability == Stability::Repelling)
        .ok_or_else(|| Error::InvalidArgument(format!("no repelling fixed point at {p}")))
}

/// Segment 1 follows θ* + offset₁ and θ* + offset₂ under p0, where θ* is a
/// point of the repelling `cycle`. The first perturbation is the earliest
/// sample within 10⁻⁵ of p0 with exactly one attracted critical orbit; the
/// second is the earliest sample within half that distance of it whose
/// classification is hyperbolic. Each later segment applies its own map to
/// the last recorded points of the previous one.
///
/// All-zero `lengths` give an empty dataset without searching.
pub fn generate_orbits_dataset(
    p0: &Parameters,
    cycle: &CycleInfo,
    offsets: (f64, f64),
    lengths: [usize; 3],
    seed: u64,
) -> Result<OrbitsDataset> {
    if cycle.stability != Stability::Repelling {
        return Err(Error::InvalidArgument(format!(
            "start cycle must be repelling, got {:?}",
            cycle.stability
        )));
    }
    for o in [offsets.0, offsets.1] {
        if o == 0.0 || !(o.abs() <= MAX_OFFSET) {
            return Err(Error::InvalidArgument(format!(
                "offsets must be nonzero and at most {MAX_OFFSET} in size, got {o}"
            )));
        }
    }
    if lengths.iter().all(|&n| n == 0) {
        return Ok(OrbitsDataset::default());
    }
    let budget = ClassifyBudget::default();

    let first = search_nearby(p0, FIRST_EPSILON, SEARCH_SAMPLES, seed, &budget, |c| {
        c.attracted_orbits() == 1
    })?;
    let p1 = first.found.ok_or_else(|| {
        Error::SearchFailed(format!(
            "no parameter with one attracting cycle within {FIRST_EPSILON:e} of {p0} in {SEARCH_SAMPLES} samples"
        ))
    })?;
    if first.distance == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{p0} already has one attracted critical orbit"
        )));
    }
    let eps2 = first.distance / 2.0;
    let second = search_nearby(&p1, eps2, SEARCH_SAMPLES, seed.wrapping_add(1), &budget, |c| {
        c.verdict == Verdict::Hyperbolic
    })?;
    let p2 = second.found.ok_or_else(|| {
        Error::SearchFailed(format!(
            "no hyperbolic parameter within {eps2:e} of {p1} in {SEARCH_SAMPLES} samples"
        ))
    })?;

    let base = cycle.points[0].value();
    let mut state: Option<(f64, f64)> = None;
    let mut segments = Vec::with_capacity(3);
    let plan = [
        (*p0, SegmentLabel::Unstable, lengths[0]),
        (p1, SegmentLabel::AfterFirstPerturbation, lengths[1]),
        (p2, SegmentLabel::AfterSecondPerturbation, lengths[2]),
    ];
    for (params, label, len) in plan {
        let (mut orbit1, mut orbit2) = (Vec::with_capacity(len), Vec::with_capacity(len));
        for _ in 0..len {
            let next = match state {
                None => (base + offsets.0, base + offsets.1),
                Some((x1, x2)) => (
                    advance(params.alpha(), params.b(), x1),
                    advance(params.alpha(), params.b(), x2),
                ),
            };
            orbit1.push(CircleAngle::new(next.0));
            orbit2.push(CircleAngle::new(next.1));
            state = Some(next);
        }
        segments.push(Segment {
            params,
            label,
            orbit1,
            orbit2,
        });
    }
    Ok(OrbitsDataset {
        segments,
        perturbation_sizes: vec![first.distance, second.distance],
    })
}

/// CSV with header `step,segment,label,alpha,b,theta1,theta2`. Reals are
/// written with 17 significant digits, enough to round-trip any f64.
pub fn write_csv_to<W: Write>(d: &OrbitsDataset, mut w: W) -> Result<()> {
    writeln!(w, "step,segment,label,alpha,b,theta1,theta2")?;
    let mut step = 0usize;
    for (k, seg) in d.segments.iter().enumerate() {
        for (t1, t2) in seg.orbit1.iter().zip(&seg.orbit2) {
            writeln!(
                w,
                "{step},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                k + 1,
                seg.label.name(),
                seg.params.alpha(),
                seg.params.b(),
                t1.value(),
                t2.value()
            )?;
            step += 1;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(d: &OrbitsDataset, path: &Path) -> Result<()> {
    write_csv_to(d, BufWriter::new(File::create(path)?))
}
