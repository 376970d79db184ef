//! Fourier coefficients of the natural product measure on `E_{S,D}`.
//!
//! The natural measure picks the digit at position `n` uniformly from
//! `A_n` (all digits if `n ∈ S`, else `D`), so its transform factors as
//! `μ̂(m) = Π_n (1/♯A_n) Σ_{d ∈ A_n} e^{-2πi m d b^{-n}}`. Truncating the product
//! at depth `N` gives exactly the transform of the uniform atomic measure on the
//! depth-`N` left endpoints.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digits::DigitSystem;
use crate::error::{Error, Result};
use crate::exact;
use crate::positions::PositionSet;

/// Largest supported `|m|`; keeps `m·d` well inside exact integer range.
pub const MAX_FREQUENCY: i64 = 1 << 40;

/// Depth is searched up to this bound when meeting a tolerance.
const MAX_DEPTH: u64 = 4096;

#[derive(Clone, Debug)]
pub struct NaturalMeasure {
    pub system: DigitSystem,
    pub positions: PositionSet,
}

impl NaturalMeasure {
    pub fn new(system: DigitSystem, positions: PositionSet) -> Self {
        NaturalMeasure { system, positions }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierValue {
    pub frequency: i64,
    #[serde(with = "exact::complex17")]
    pub value: Complex64,
    pub depth: u64,
    /// `|exact - value| <= tail_bound`.
    #[serde(with = "exact::f64_17")]
    pub tail_bound: f64,
}

fn check_frequency(m: i64) -> Result<()> {
    if m.checked_abs().is_none_or(|a| a > MAX_FREQUENCY) {
        return Err(Error::FrequencyOutOfRange(m));
    }
    Ok(())
}

/// `e^{-2πi·m·d/b^n}` with `m·d` reduced modulo `b^n` first.
fn phase(base: u32, n: u64, md: u64) -> Complex64 {
    let scale = u32::try_from(n).ok().and_then(|n| (base as u128).checked_pow(n));
    let frac = match scale {
        Some(bn) => {
            let r = md as u128 % bn;
            // nearest representative keeps the angle in [-π, π]
            let signed = if 2 * r > bn { r as f64 - bn as f64 } else { r as f64 };
            signed / bn as f64
        }
        None => md as f64 / (base as f64).powf(n as f64),
    };
    let (s, c) = (-TAU * frac).sin_cos();
    Complex64::new(c, s)
}

/// `(1/♯A_n) Σ_{d ∈ A_n} e^{-2πi m d b^{-n}}`.
pub fn digit_factor(measure: &NaturalMeasure, n: u64, m: i64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidParams("positions start at 1".into()));
    }
    check_frequency(m)?;
    let base = measure.system.base();
    let free = measure.positions.contains(n)?;
    let value = if m == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        let a = m.unsigned_abs();
        let (sum, count) = if free {
            let sum: Complex64 = (0..base as u64).map(|d| phase(base, n, a * d)).sum();
            (sum, base as f64)
        } else {
            let allowed = measure.system.allowed();
            let sum: Complex64 = allowed.iter().map(|&d| phase(base, n, a * d as u64)).sum();
            (sum, allowed.len() as f64)
        };
        sum / count
    };
    Ok(if m < 0 { value.conj() } else { value })
}

/// `exp(2π|m|·b^{-N}) - 1`.
pub fn tail_bound(base: u32, m: i64, depth: u64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let x = TAU * m.unsigned_abs() as f64 * (base as f64).powf(-(depth as f64));
    x.exp_m1()
}

/// Smallest depth whose tail bound is at most `tolerance`.
pub fn depth_for_tolerance(base: u32, m: i64, tolerance: f64) -> Result<u64> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be positive and finite, got {tolerance}"
        )));
    }
    check_frequency(m)?;
    (1..=MAX_DEPTH)
        .find(|&n| tail_bound(base, m, n) <= tolerance)
        .ok_or_else(|| Error::InvalidParams(format!("tolerance {tolerance} is unreachable")))
}

/// The product of the first `depth` digit factors.
pub fn fourier_coefficient(measure: &NaturalMeasure, m: i64, depth: u64) -> Result<FourierValue> {
    if depth == 0 {
        return Err(Error::InvalidParams("depth must be at least 1".into()));
    }
    check_frequency(m)?;
    measure.positions.check_horizon(depth)?;
    let mut value = Complex64::new(1.0, 0.0);
    if m != 0 {
        for n in 1..=depth {
            value *= digit_factor(measure, n, m)?;
        }
    }
    Ok(FourierValue {
        frequency: m,
        value,
        depth,
        tail_bound: tail_bound(measure.system.base(), m, depth),
    })
}

/// `fourier_coefficient` at the depth chosen by `depth_for_tolerance`.
pub fn coefficient_to_tolerance(
    measure: &NaturalMeasure,
    m: i64,
    tolerance: f64,
) -> Result<FourierValue> {
    let depth = depth_for_tolerance(measure.system.base(), m, tolerance)?;
    fourier_coefficient(measure, m, depth)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMax {
    /// Frequency attaining the maximum; the smallest one on ties.
    pub frequency: i64,
    #[serde(with = "exact::f64_17")]
    pub abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: u32,
    pub frequency: i64,
    #[serde(with = "exact::f64_17")]
    pub abs: f64,
    #[serde(with = "exact::f64_17")]
    pub tail_bound: f64,
    pub depth: u64,
    /// Whether `k + 1 ∈ S`; if so the factor at position `k + 1` vanishes.
    pub next_in_s: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_max: Option<BlockMax>,
}

/// `|μ̂(b^k)|` for each `k`, with the block maxima over `[b^k, b^{k+1})` when a
/// budget for them is given.
pub fn nondecay_scan(
    measure: &NaturalMeasure,
    ks: &[u32],
    tolerance: f64,
    block_budget: Option<u64>,
) -> Result<Vec<ScanRow>> {
    let positions = &measure.positions;
    if let Some(h) = positions.horizon() {
        if positions.count_upto(h)? == h {
            return Err(Error::ComplementFinite { horizon: h });
        }
    }
    let base = measure.system.base();
    let power = |k: u32| -> Result<i64> {
        (base as i64)
            .checked_pow(k)
            .filter(|&m| m <= MAX_FREQUENCY)
            .ok_or(Error::FrequencyOutOfRange(i64::MAX))
    };
    ks.par_iter()
        .map(|&k| {
            let m = power(k)?;
            let v = coefficient_to_tolerance(measure, m, tolerance)?;
            let block_max = match block_budget {
                None => None,
                Some(budget) => Some(block_maximum(measure, k, power(k + 1)?, tolerance, budget)?),
            };
            Ok(ScanRow {
                k,
                frequency: m,
                abs: v.value.norm(),
                tail_bound: v.tail_bound,
                depth: v.depth,
                next_in_s: positions.contains(k as u64 + 1)?,
                block_max,
            })
        })
        .collect()
}

fn block_maximum(
    measure: &NaturalMeasure,
    k: u32,
    end: i64,
    tolerance: f64,
    budget: u64,
) -> Result<BlockMax> {
    let start = end / measure.system.base() as i64;
    let size = (end - start) as u64;
    debug_assert_eq!(start, (measure.system.base() as i64).pow(k));
    if size > budget {
        return Err(Error::BudgetExceeded {
            what: "block maximum",
            required: size.to_string(),
            budget,
        });
    }
    // one depth for the whole block, sized for its largest frequency
    let depth = depth_for_tolerance(measure.system.base(), end - 1, tolerance)?;
    let values: Vec<(i64, f64)> = (start..end)
        .into_par_iter()
        .map(|m| Ok((m, fourier_coefficient(measure, m, depth)?.value.norm())))
        .collect::<Result<_>>()?;
    let (frequency, abs) = values
        .into_iter()
        .fold((start, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(BlockMax { frequency, abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::enumerate_approximation;
    use num_bigint::BigUint;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn measure(b: u32, d: &[u32], s: PositionSet) -> NaturalMeasure {
        NaturalMeasure::new(DigitSystem::new(b, d).unwrap(), s)
    }

    /// Direct transform of the uniform atomic measure on the depth-`n` endpoints.
    fn direct(mu: &NaturalMeasure, m: i64, n: u64) -> Complex64 {
        let approx = enumerate_approximation(&mu.system, &mu.positions, n, 1 << 16).unwrap();
        let modulus = BigUint::from(mu.system.base()).pow(n as u32);
        let mut sum = Complex64::new(0.0, 0.0);
        for p in approx.endpoints() {
            // p = a / b^n exactly since endpoints carry scale n
            let a = p.numerator() * BigUint::from(m.unsigned_abs());
            let r = (a % &modulus).to_f64().unwrap() / modulus.to_f64().unwrap();
            sum += Complex64::from_polar(1.0, -TAU * r);
        }
        let v = sum / approx.len() as f64;
        if m < 0 { v.conj() } else { v }
    }

    #[test]
    fn factor_examples() {
        let mu = measure(2, &[0], PositionSet::odds());
        assert_eq!(digit_factor(&mu, 3, 0).unwrap(), Complex64::new(1.0, 0.0));
        assert!(digit_factor(&mu, 5, 16).unwrap().norm() < 1e-15);
        assert_eq!(digit_factor(&mu, 4, 12345).unwrap(), Complex64::new(1.0, 0.0));
        assert!(digit_factor(&mu, 0, 1).is_err());
        assert_eq!(
            digit_factor(&mu, 1, MAX_FREQUENCY + 1),
            Err(Error::FrequencyOutOfRange(MAX_FREQUENCY + 1))
        );
    }

    #[test]
    fn zero_frequency_is_normalized() {
        let mu = measure(3, &[0, 2], PositionSet::cube_blocks());
        let v = fourier_coefficient(&mu, 0, 7).unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
        assert_eq!(v.tail_bound, 0.0);
    }

    #[test]
    fn product_matches_direct_sum() {
        let mu = measure(2, &[0], PositionSet::odds());
        let v = fourier_coefficient(&mu, 2, 12).unwrap();
        assert!((v.value - direct(&mu, 2, 12)).norm() < 1e-12);

        let mu = measure(3, &[1], PositionSet::periodic(3, &[0, 2]).unwrap());
        for m in [-700, -5, 1, 2, 9, 10_000] {
            let v = fourier_coefficient(&mu, m, 8).unwrap();
            assert!((v.value - direct(&mu, m, 8)).norm() < 1e-12, "m={m}");
        }
    }

    #[test]
    fn depth_is_chosen_from_the_tolerance() {
        let n = depth_for_tolerance(2, 1 << 10, 1e-12).unwrap();
        assert!(tail_bound(2, 1 << 10, n) <= 1e-12);
        assert!(tail_bound(2, 1 << 10, n - 1) > 1e-12);
        assert!(depth_for_tolerance(2, 1, 0.0).is_err());
    }

    #[test]
    fn truncated_sets_respect_their_horizon() {
        let mu = measure(2, &[0], PositionSet::explicit(&[1, 2], 10).unwrap());
        assert!(fourier_coefficient(&mu, 3, 10).is_ok());
        assert!(matches!(
            fourier_coefficient(&mu, 3, 11),
            Err(Error::HorizonExceeded { .. })
        ));
        let full = measure(2, &[0], PositionSet::explicit(&[1, 2, 3], 3).unwrap());
        assert_eq!(
            nondecay_scan(&full, &[1], 1e-3, None),
            Err(Error::ComplementFinite { horizon: 3 })
        );
    }

    #[test]
    fn nondecay_on_odds() {
        // constants frozen from an independent high-depth product
        let mu = measure(2, &[0], PositionSet::odds());
        let ks: Vec<u32> = (2..=15).collect();
        for row in nondecay_scan(&mu, &ks, 1e-12, None).unwrap() {
            assert_eq!(row.next_in_s, row.k % 2 == 0);
            if row.next_in_s {
                assert!(row.abs <= 1e-12, "k={}", row.k);
            } else {
                assert!((row.abs - 0.6926289126994456).abs() < 1e-9, "k={}", row.k);
            }
        }

        let mu = measure(3, &[0, 2], PositionSet::odds());
        let ks: Vec<u32> = (2..=10).collect();
        for row in nondecay_scan(&mu, &ks, 1e-12, None).unwrap() {
            if row.next_in_s {
                assert!(row.abs <= 1e-12);
            } else {
                assert!((row.abs - 0.409667168471023).abs() < 1e-9, "k={}", row.k);
            }
        }
    }

    #[test]
    fn block_maxima_dominate_the_power() {
        let mu = measure(2, &[0], PositionSet::cube_blocks());
        let rows = nondecay_scan(&mu, &[4, 8], 1e-9, Some(1 << 10)).unwrap();
        for row in &rows {
            let bm = row.block_max.as_ref().unwrap();
            assert!(bm.abs + 1e-12 >= row.abs);
            assert!(bm.frequency >= row.frequency && bm.frequency < 2 * row.frequency);
        }
        assert!(matches!(
            nondecay_scan(&mu, &[12], 1e-9, Some(100)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conjugate_symmetry(m in -(1i64 << 40)..(1i64 << 40), n in 1u64..60) {
            let mu = measure(3, &[0, 2], PositionSet::cube_blocks());
            let a = fourier_coefficient(&mu, m, n).unwrap();
            let b = fourier_coefficient(&mu, -m, n).unwrap();
            prop_assert_eq!(a.value, b.value.conj());
            prop_assert!(a.value.norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn depth_stability(m in 1i64..1_000_000, n in 1u64..40, b in 2u32..4) {
            let mu = measure(b, &[1], PositionSet::odds());
            let shallow = fourier_coefficient(&mu, m, n).unwrap();
            let deep = fourier_coefficient(&mu, m, n + 5).unwrap();
            prop_assert!((shallow.value - deep.value).norm() <= shallow.tail_bound + 1e-12);
        }

        #[test]
        fn agrees_with_direct_sum(m in -10_000i64..10_000, b in 2u32..4, n in 1u64..10) {
            let mu = measure(b, &[0], PositionSet::cube_blocks());
            let v = fourier_coefficient(&mu, m, n).unwrap();
            prop_assert!((v.value - direct(&mu, m, n)).norm() < 1e-12);
        }
    }
}
