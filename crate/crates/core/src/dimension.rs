//! Density profiles of `S` and the Hausdorff/Assouad dimensions of `E_{S,D}`.
//!
//! Both dimensions are `β + (1 - β)·ρ` with `β = log ♯D / log b`: `ρ` is the
//! lower density of `S` for the Hausdorff dimension and the limsup of window
//! densities for the Assouad dimension.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::exact;
use crate::positions::PositionSet;

/// How a limiting density was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    /// Computed exactly from one period.
    PeriodScan,
    /// Read off the defining rule and checked along its structural checkpoints.
    ConstructionRule,
    /// Finite data only; the true limit may differ.
    EstimateAtHorizon,
}

impl Exactness {
    pub fn is_exact(self) -> bool {
        !matches!(self, Exactness::EstimateAtHorizon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityLimit {
    pub value: f64,
    #[serde(with = "exact::opt_rational")]
    pub exact: Option<BigRational>,
    pub exactness: Exactness,
}

impl DensityLimit {
    fn exact(r: BigRational, exactness: Exactness) -> Self {
        DensityLimit {
            value: r.to_f64().unwrap_or(f64::NAN),
            exact: Some(r),
            exactness,
        }
    }

    fn estimate(value: f64) -> Self {
        DensityLimit {
            value,
            exact: None,
            exactness: Exactness::EstimateAtHorizon,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub n: u64,
    pub count: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub samples: Vec<DensitySample>,
    /// Smallest ratio over the checkpoints.
    pub checkpoint_min: f64,
    pub liminf: DensityLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSup {
    pub m: u64,
    /// Leftmost offset `k` attaining the maximum of `♯(S ∩ {k+1, .., k+m})`.
    pub offset: u64,
    pub count: u64,
    pub density: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowDensityReport {
    pub offset_bound: u64,
    pub windows: Vec<WindowSup>,
    pub limsup: DensityLimit,
    /// A window `{k+1, .., k+m} ⊆ S` for the largest requested `m`, when one is known.
    pub witness: Option<(u64, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionValue {
    pub value: f64,
    pub exactness: Exactness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub base_term: f64,
    pub hausdorff: DimensionValue,
    pub assouad: DimensionValue,
    pub lower_density: DensityLimit,
    pub window_density: DensityLimit,
}

/// `♯(S ∩ {k+1, .., k+m})`.
pub fn count_in_range(positions: &PositionSet, k: u64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::InvalidParams("window length must be positive".into()));
    }
    let end = k
        .checked_add(m)
        .ok_or_else(|| Error::InvalidParams("window end overflows".into()))?;
    Ok(positions.count_upto(end)? - positions.count_upto(k)?)
}

fn rule_lower_density(positions: &PositionSet) -> Option<DensityLimit> {
    match positions {
        PositionSet::Periodic(p) => Some(DensityLimit::exact(
            BigRational::new(
                BigInt::from(p.residues().len()),
                BigInt::from(p.period()),
            ),
            Exactness::PeriodScan,
        )),
        PositionSet::CubeBlocks => Some(DensityLimit::exact(
            BigRational::zero(),
            Exactness::ConstructionRule,
        )),
        PositionSet::Case1(c) => match c.profile() {
            crate::constructions::Profile::Fractional(s) => {
                Some(DensityLimit::exact(s.clone(), Exactness::ConstructionRule))
            }
            crate::constructions::Profile::Full => None,
        },
        PositionSet::Case3(_) => Some(DensityLimit::exact(
            BigRational::one(),
            Exactness::ConstructionRule,
        )),
        PositionSet::ExplicitTruncated(_) => None,
    }
}

/// Ratios `♯(S ∩ [1, N]) / N` at each checkpoint and the resulting liminf.
pub fn lower_density_profile(positions: &PositionSet, checkpoints: &[u64]) -> Result<DensityProfile> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidParams("at least one checkpoint is required".into()));
    }
    if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(
            "checkpoints must be positive and strictly increasing".into(),
        ));
    }
    positions.check_horizon(*checkpoints.last().expect("nonempty"))?;
    let samples = checkpoints
        .iter()
        .map(|&n| {
            let count = positions.count_upto(n)?;
            Ok(DensitySample {
                n,
                count,
                ratio: count as f64 / n as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let checkpoint_min = samples
        .iter()
        .map(|s| s.ratio)
        .fold(f64::INFINITY, f64::min);
    let liminf = rule_lower_density(positions).unwrap_or_else(|| DensityLimit::estimate(checkpoint_min));
    Ok(DensityProfile {
        samples,
        checkpoint_min,
        liminf,
    })
}

fn window_sup(positions: &PositionSet, m: u64, offsets: u64) -> Result<WindowSup> {
    let mut best = WindowSup {
        m,
        offset: 0,
        count: 0,
        density: 0.0,
    };
    let mut first = true;
    for k in 0..=offsets {
        let c = count_in_range(positions, k, m)?;
        if first || c > best.count {
            best.offset = k;
            best.count = c;
            first = false;
        }
        if c == m {
            break;
        }
    }
    best.density = best.count as f64 / m as f64;
    Ok(best)
}

/// Per-window suprema of `♯(S ∩ {k+1, .., k+m}) / m` over `0 <= k <= offset_bound`.
pub fn window_density_profile(
    positions: &PositionSet,
    windows: &[u64],
    offset_bound: u64,
) -> Result<WindowDensityReport> {
    let Some(&largest) = windows.iter().max() else {
        return Err(Error::InvalidParams("at least one window length is required".into()));
    };
    if windows.contains(&0) {
        return Err(Error::InvalidParams("window lengths must be positive".into()));
    }
    positions.check_horizon(largest.saturating_add(offset_bound))?;

    // a periodic set repeats every period, so one period of offsets is exhaustive
    let offsets = match positions {
        PositionSet::Periodic(p) => offset_bound.min(p.period() - 1),
        _ => offset_bound,
    };
    let sups = windows
        .par_iter()
        .map(|&m| window_sup(positions, m, offsets))
        .collect::<Result<Vec<_>>>()?;

    let (limsup, witness) = match positions {
        PositionSet::Periodic(p) => (
            DensityLimit::exact(
                BigRational::new(
                    BigInt::from(p.residues().len()),
                    BigInt::from(p.period()),
                ),
                Exactness::PeriodScan,
            ),
            None,
        ),
        _ if positions.has_unbounded_runs() => {
            let start = positions
                .first_run(largest, u64::MAX)?
                .expect("runs of every length exist");
            (
                DensityLimit::exact(BigRational::one(), Exactness::ConstructionRule),
                Some((start - 1, largest)),
            )
        }
        _ => {
            let at_largest = sups
                .iter()
                .find(|w| w.m == largest)
                .expect("largest window present");
            let witness = (at_largest.count == largest).then_some((at_largest.offset, largest));
            (DensityLimit::estimate(at_largest.density), witness)
        }
    };
    Ok(WindowDensityReport {
        offset_bound,
        windows: sups,
        limsup,
        witness,
    })
}

fn formula(base_term: f64, density: f64) -> f64 {
    if density >= 1.0 {
        1.0
    } else {
        base_term + (1.0 - base_term) * density
    }
}

pub fn hausdorff_dimension(system: &DigitSystem, profile: &DensityProfile) -> DimensionValue {
    DimensionValue {
        value: formula(system.base_term(), profile.liminf.value),
        exactness: profile.liminf.exactness,
    }
}

pub fn assouad_dimension(system: &DigitSystem, report: &WindowDensityReport) -> DimensionValue {
    DimensionValue {
        value: formula(system.base_term(), report.limsup.value),
        exactness: report.limsup.exactness,
    }
}

pub fn dimension_report(
    system: &DigitSystem,
    profile: &DensityProfile,
    windows: &WindowDensityReport,
) -> DimensionReport {
    DimensionReport {
        base_term: system.base_term(),
        hausdorff: hausdorff_dimension(system, profile),
        assouad: assouad_dimension(system, windows),
        lower_density: profile.liminf.clone(),
        window_density: windows.limsup.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringStats {
    #[serde(with = "exact::rational")]
    pub r: BigRational,
    #[serde(with = "exact::rational")]
    pub big_r: BigRational,
    /// `max` over centers of the minimal number of closed `r`-balls covering
    /// the points in `[x - R, x + R]`.
    pub count: u64,
    #[serde(with = "exact::rational")]
    pub center: BigRational,
}

/// Greedy one-dimensional cover of the points in `[center - R, center + R]` by
/// intervals of length `2r`; greedy from the left is optimal on the line.
fn cover_around(points: &[BigRational], r: &BigRational, big_r: &BigRational, center: &BigRational) -> u64 {
    let lo = center - big_r;
    let hi = center + big_r;
    let two_r = r + r;
    let mut i = points.partition_point(|p| *p < lo);
    let mut count = 0;
    while i < points.len() && points[i] <= hi {
        let reach = &points[i] + &two_r;
        count += 1;
        while i < points.len() && points[i] <= reach && points[i] <= hi {
            i += 1;
        }
    }
    count
}

/// `N_{r,R}` of a finite sorted point set, maximized over `centers`
/// (all points when `centers` is `None`).
pub fn covering_count(
    points: &[BigRational],
    r: &BigRational,
    big_r: &BigRational,
    centers: Option<&[BigRational]>,
) -> Result<CoveringStats> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    if !r.is_positive() || r >= big_r {
        return Err(Error::InvalidParams(format!(
            "need 0 < r < R, got r = {r}, R = {big_r}"
        )));
    }
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParams("points must be sorted".into()));
    }
    let centers = centers.unwrap_or(points);
    if centers.is_empty() {
        return Err(Error::InvalidParams("no centers given".into()));
    }
    let (count, center) = centers
        .par_iter()
        .map(|c| (cover_around(points, r, big_r, c), c))
        // ties go to the leftmost center
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("nonempty centers");
    Ok(CoveringStats {
        r: r.clone(),
        big_r: big_r.clone(),
        count,
        center: center.clone(),
    })
}
