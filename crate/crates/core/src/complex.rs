//! The complex extension g(z) = e^{iα}·z·exp(b(z − 1/z)/2) on the punctured
//! plane, with escape itineraries towards the essential singularities 0 and ∞.

use num_complex::Complex64;
use serde::Serialize;

use crate::map::Parameters;

/// Beyond this |log|z|| the stored z is no longer updated.
pub const STALE_LOG_MAG: f64 = 300.0;
/// Saturation value for log_mag once the orbit has run off to 0 or ∞.
pub const LOG_MAG_CAP: f64 = 1e300;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e10;
pub const MAX_SYMBOLS: usize = 16;
/// Length of the monotone tail required before calling an orbit escaped.
const ESCAPE_TAIL: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexState {
    /// Last finite value of the orbit; frozen once `stale` is set.
    pub z: Complex64,
    pub log_mag: f64,
    pub stale: bool,
    /// Unit direction of the orbit. Tracks z/|z| while fresh and evolves
    /// only through the surrogate once stale.
    dir: Complex64,
}

impl ComplexState {
    /// `None` for z = 0 or non-finite z. A z within rounding of the unit
    /// circle is placed on it, where the orbit then stays.
    pub fn new(z: Complex64) -> Option<Self> {
        let r = z.norm();
        if r == 0.0 || !r.is_finite() {
            return None;
        }
        if (r - 1.0).abs() <= 4.0 * f64::EPSILON {
            let u = Complex64::from_polar(1.0, z.arg());
            return Some(ComplexState {
                z: u,
                log_mag: 0.0,
                stale: false,
                dir: u,
            });
        }
        Some(ComplexState {
            z,
            log_mag: r.ln(),
            stale: false,
            dir: z / r,
        })
    }

    pub fn on_unit_circle(&self) -> bool {
        self.log_mag == 0.0 && !self.stale
    }

    pub fn direction(&self) -> Complex64 {
        self.dir
    }
}

/// One step of g. Fresh states use the closed form; stale states advance
/// log_mag with the dominant term of Re(b(z − 1/z)/2) and keep a frozen
/// direction, which is enough to follow the escape itinerary.
pub fn g_step(p: &Parameters, s: &ComplexState) -> ComplexState {
    let (alpha, b) = (p.alpha(), p.b());
    if s.stale {
        let scale = s.log_mag.abs().min(700.0).exp();
        let delta = if s.dir.re == 0.0 {
            0.0
        } else if s.log_mag > 0.0 {
            // z − 1/z ≈ z near ∞
            0.5 * b * scale * s.dir.re
        } else {
            // z − 1/z ≈ −1/z near 0, and Re(1/z) = cos(−arg z)/|z|
            -0.5 * b * scale * s.dir.re
        };
        let log_mag = (s.log_mag + delta).clamp(-LOG_MAG_CAP, LOG_MAG_CAP);
        return ComplexState { log_mag, ..*s };
    }
    if s.on_unit_circle() {
        // g(e^{iθ}) = e^{i(θ + α + b sin θ)}; the circle repels transversally,
        // so it is followed through the circle map rather than the formula.
        let theta = s.z.arg();
        let z = Complex64::from_polar(1.0, theta + alpha + b * theta.sin());
        return ComplexState {
            z,
            log_mag: 0.0,
            stale: false,
            dir: z,
        };
    }
    let w = (s.z - s.z.inv()) * (0.5 * b);
    let log_mag = s.log_mag + w.re;
    if log_mag.abs() > STALE_LOG_MAG {
        let phase = alpha + s.z.arg() + w.im;
        return ComplexState {
            z: s.z,
            log_mag,
            stale: true,
            dir: Complex64::from_polar(1.0, phase),
        };
    }
    let z = Complex64::from_polar(1.0, alpha) * s.z * w.exp();
    let r = z.norm();
    ComplexState {
        z,
        log_mag,
        stale: false,
        dir: z / r,
    }
}

/// g(z) evaluated directly.
pub fn g(p: &Parameters, z: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, p.alpha()) * z * ((z - z.inv()) * (0.5 * p.b())).exp()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Fate {
    /// Itinerary over {Z, I}: Z near 0, I near ∞.
    EscapePattern(String),
    Bounded,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FateRecord {
    pub fate: Fate,
    /// The first (at most 16) itinerary letters, whatever the fate.
    pub symbols: String,
    pub steps: usize,
}

/// Iterate from z0 for `max_iter` steps and record the itinerary outside the
/// annulus 1/R ≤ |z| ≤ R. An orbit counts as escaped when it is outside the
/// annulus at the end of the budget, has stayed outside for at least the
/// last 10 steps, and |log|z|| has not decreased over those steps.
///
/// z0 = 0 (or non-finite) yields `Unknown` with no steps taken.
pub fn classify_fate(p: &Parameters, z0: Complex64, max_iter: usize, escape_radius: f64) -> FateRecord {
    let unknown = FateRecord {
        fate: Fate::Unknown,
        symbols: String::new(),
        steps: 0,
    };
    let Some(mut s) = ComplexState::new(z0) else {
        return unknown;
    };
    if !(escape_radius > 1.0) {
        return unknown;
    }
    let log_r = escape_radius.ln();
    let mut symbols = String::new();
    let mut ever_outside = false;
    let mut outside_run = 0usize;
    let mut monotone_run = 0usize;
    let mut prev_abs = f64::NAN;

    let mut visit = |s: &ComplexState| {
        let outside = s.log_mag.abs() > log_r;
        if outside {
            ever_outside = true;
            if symbols.len() < MAX_SYMBOLS {
                symbols.push(if s.log_mag > 0.0 { 'I' } else { 'Z' });
            }
            monotone_run = if outside_run > 0 && s.log_mag.abs() >= prev_abs {
                monotone_run + 1
            } else {
                0
            };
            outside_run += 1;
        } else {
            outside_run = 0;
            monotone_run = 0;
        }
        prev_abs = s.log_mag.abs();
    };

    visit(&s);
    for _ in 0..max_iter {
        s = g_step(p, &s);
        visit(&s);
    }

    let fate = if !ever_outside {
        Fate::Bounded
    } else if outside_run > ESCAPE_TAIL && monotone_run >= ESCAPE_TAIL {
        Fate::EscapePattern(symbols.clone())
    } else {
        Fate::Unknown
    };
    FateRecord {
        fate,
        symbols,
        steps: max_iter,
    }
}

/// 64-bit FNV-1a.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in bytes {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Bounded → 255, Unknown → 0, escape patterns → 40 + FNV-1a-64(symbols) mod 180.
pub fn fate_shade(f: &FateRecord) -> u8 {
    match &f.fate {
        Fate::Bounded => 255,
        Fate::Unknown => 0,
        Fate::EscapePattern(sym) => (40 + fnv1a64(sym.as_bytes()) % 180) as u8,
    }
}
