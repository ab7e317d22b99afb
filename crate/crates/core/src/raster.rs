//! Grayscale rasters of the parameter plane and of the complex dynamical
//! plane, written as binary PGM.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::classify::{classify_parameter, ClassifyBudget, Verdict};
use crate::complex::{classify_fate, fate_shade, DEFAULT_ESCAPE_RADIUS, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::map::Parameters;

pub const WHITE: u8 = 255;
pub const BLACK: u8 = 0;
pub const NEUTRAL_GRAY: u8 = 128;
pub const CRITICAL_LINE_GRAY: u8 = 160;

/// Classification budget used for parameter-plane renders unless overridden.
/// Lighter than the default so a 400×400 image stays well under a minute on
/// one core.
pub const RENDER_BUDGET: ClassifyBudget = ClassifyBudget {
    transient: 4096,
    q_max: 64,
    tol: 1e-7,
};

/// Axis-aligned rectangle: x is horizontal (α or Re z), y vertical (b or Im z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Region {
    pub const FULL_PARAMETER_PLANE: Region = Region {
        x0: -PI,
        x1: PI,
        y0: 0.0,
        y1: 4.0,
    };

    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let r = Region { x0, x1, y0, y1 };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite());
        if !finite || !(self.x1 > self.x0) || !(self.y1 > self.y0) {
            return Err(Error::InvalidRegion(format!("{self} has no area")));
        }
        Ok(())
    }

    /// Center of column `i` of `width`. The affine map is written around the
    /// midpoint so that a region symmetric about 0 gives exactly mirrored
    /// centers.
    pub fn column_center(&self, i: usize, width: usize) -> f64 {
        let step = (self.x1 - self.x0) / width as f64;
        let mid = 0.5 * (self.x0 + self.x1);
        mid + (i as f64 + 0.5 - 0.5 * width as f64) * step
    }

    /// Center of row `j` of `height`; row 0 is the top edge (largest y).
    pub fn row_center(&self, j: usize, height: usize) -> f64 {
        let step = (self.y1 - self.y0) / height as f64;
        let mid = 0.5 * (self.y0 + self.y1);
        mid - (j as f64 + 0.5 - 0.5 * height as f64) * step
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{},{}", self.x0, self.x1, self.y0, self.y1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub pixels: Vec<u8>,
    pub region: Region,
    /// Ordered key/value pairs written as PGM comments.
    pub metadata: Vec<(String, String)>,
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidRegion(format!("image size {width}x{height} is empty")));
    }
    Ok(())
}

fn render_rows<F>(width: usize, height: usize, pixel: F) -> Vec<u8>
where
    F: Fn(usize, usize) -> u8 + Sync,
{
    (0..height)
        .into_par_iter()
        .map(|j| (0..width).map(|i| pixel(i, j)).collect::<Vec<u8>>())
        .collect::<Vec<_>>()
        .concat()
}

pub fn verdict_shade(v: &Verdict) -> u8 {
    match v {
        Verdict::Hyperbolic | Verdict::SubcriticalLocked { .. } => WHITE,
        Verdict::NeutralSuspected => NEUTRAL_GRAY,
        Verdict::Undetected | Verdict::SubcriticalUnresolved => BLACK,
    }
}

/// Classify every pixel center of `region` in (α, b). The row whose center is
/// nearest b = 1 is drawn in gray when the region contains that line.
pub fn render_parameter_plane(
    region: &Region,
    width: usize,
    height: usize,
    budget: &ClassifyBudget,
) -> Result<GrayImage> {
    region.validate()?;
    check_dims(width, height)?;
    if region.x0 < -PI || region.x1 > PI || region.y0 < 0.0 {
        return Err(Error::InvalidRegion(format!("{region} is outside α ∈ [−π, π], b ≥ 0")));
    }
    let mut pixels = render_rows(width, height, |i, j| {
        let alpha = region.column_center(i, width);
        let b = region.row_center(j, height);
        match Parameters::new(alpha, b) {
            Ok(p) => verdict_shade(&classify_parameter(&p, budget).verdict),
            Err(_) => BLACK,
        }
    });
    if region.y0 <= 1.0 && 1.0 <= region.y1 {
        let j = (0..height)
            .min_by(|&a, &c| {
                let da = (region.row_center(a, height) - 1.0).abs();
                let dc = (region.row_center(c, height) - 1.0).abs();
                da.total_cmp(&dc)
            })
            .expect("height > 0");
        pixels[j * width..(j + 1) * width].fill(CRITICAL_LINE_GRAY);
    }
    let metadata = vec![
        ("kind".into(), "parameter-plane".into()),
        ("region".into(), region.to_string()),
        ("transient".into(), budget.transient.to_string()),
        ("qmax".into(), budget.q_max.to_string()),
        ("tol".into(), budget.tol.to_string()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
    ];
    Ok(GrayImage {
        width,
        height,
        pixels,
        region: *region,
        metadata,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FateBudget {
    pub max_iter: usize,
    pub escape_radius: f64,
}

impl Default for FateBudget {
    fn default() -> Self {
        FateBudget {
            max_iter: DEFAULT_MAX_ITER,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        }
    }
}

/// Shade every pixel center z₀ of `region` in the complex plane by the fate
/// of its orbit under g. A center exactly at 0 is black.
pub fn render_dynamical_plane(
    p: &Parameters,
    region: &Region,
    width: usize,
    height: usize,
    budget: &FateBudget,
) -> Result<GrayImage> {
    region.validate()?;
    check_dims(width, height)?;
    if !(budget.escape_radius > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "escape radius must exceed 1, got {}",
            budget.escape_radius
        )));
    }
    let pixels = render_rows(width, height, |i, j| {
        let z0 = Complex64::new(region.column_center(i, width), region.row_center(j, height));
        if z0 == Complex64::new(0.0, 0.0) {
            return BLACK;
        }
        fate_shade(&classify_fate(p, z0, budget.max_iter, budget.escape_radius))
    });
    let metadata = vec![
        ("kind".into(), "dynamical-plane".into()),
        ("region".into(), region.to_string()),
        ("alpha".into(), p.alpha().to_string()),
        ("b".into(), p.b().to_string()),
        ("map".into(), "g(z)=exp(i*alpha)*z*exp(b*(z-1/z)/2)".into()),
        ("maxiter".into(), budget.max_iter.to_string()),
        ("escape-radius".into(), budget.escape_radius.to_string()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
    ];
    Ok(GrayImage {
        width,
        height,
        pixels,
        region: *region,
        metadata,
    })
}

/// Encode as binary PGM: "P5", one "# arnold-lab key=value" comment per
/// metadata entry, dimensions, maxval 255, then the raw pixel bytes.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels.len() + 256);
    out.extend_from_slice(b"P5\n");
    for (k, v) in &img.metadata {
        let clean = |s: &str| s.replace(['\n', '\r'], " ");
        out.extend_from_slice(format!("# arnold-lab {}={}\n", clean(k), clean(v)).as_bytes());
    }
    out.extend_from_slice(format!("{} {}\n255\n", img.width, img.height).as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

pub fn write_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_pgm(img))?;
    w.flush()?;
    Ok(())
}
