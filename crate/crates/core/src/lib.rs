//! Numerical dynamics of the Arnold family of circle maps
//! f(θ) = θ + α + b·sin θ (mod 2π) and its complex extension.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod classify;
pub mod cli;
pub mod complex;
pub mod cycles;
pub mod dataset;
pub mod error;
pub mod map;
pub mod raster;
pub mod rotation;

pub use error::{Error, Result};
pub use map::{CircleAngle, CriticalBranch, LiftPoint, Multiplier, Parameters};
