//! Sets defined by digit restrictions.
//!
//! `E_{S,D} ⊂ [0, 1]` is the set of numbers whose base-`b` digit at position `n`
//! is free when `n ∈ S` and lies in `D` otherwise. This crate materializes finite
//! approximations of such sets, evaluates their Hausdorff and Assouad dimensions
//! from the densities of `S`, extracts long arithmetic progressions from runs of
//! consecutive positions, scans Fourier coefficients of the natural product
//! measure, and builds position sets with a prescribed dimension profile.

pub mod approx;
pub mod cli;
pub mod constructions;
pub mod digits;
pub mod dimension;
pub mod error;
pub mod exact;
pub mod fourier;
pub mod positions;
pub mod progressions;

pub use approx::{enumerate_approximation, Approximation};
pub use digits::{BAdicPoint, DigitString, DigitSystem};
pub use error::{Error, Result};
pub use positions::PositionSet;
