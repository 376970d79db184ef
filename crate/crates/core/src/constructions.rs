//! Position sets with prescribed lower density `s` and window density 1.
//!
//! The integers are cut into segments `[M_j + 1, M_{j+1}]`. Segment `j` holds a
//! run `M_j + 1 ..= run_end` followed (possibly after a gap) by the isolated
//! endpoint `M_{j+1}`:
//!
//! * odd `j = 2i-1`: the run is sized so that `♯(S ∩ [1, M_{2i}]) = ⌊f_i M_{2i}⌋`,
//!   with `f_i = s` (`Case1`) or `f_i = (2i-1)/(2i)` (`Case3`);
//! * even `j = 2i`: the segment receives `⌊c_i (M_{2i+1} - M_{2i})⌋` members with
//!   `c_i = (2i-1)/(2i)` (`Case1`) or `c_i = 2i/(2i+1)` (`Case3`).
//!
//! Because `c_i → 1` and `M_j / M_{j+1} → 0`, the even runs make the window
//! density tend to 1 while the odd segments pin the lower density.

use std::sync::{Arc, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::positions::PositionSet;

/// Number of segments validated eagerly when a construction is built.
const EAGER_SEGMENTS: usize = 8;

/// `M_1 = 1 < M_2 < ..`; terms past the explicit prefix follow
/// `M_{n+1} = max(n, g)·M_n` with growth floor `g >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MSequence {
    prefix: Vec<u64>,
    growth_floor: u64,
}

impl MSequence {
    pub fn new(prefix: Vec<u64>) -> Result<Self> {
        if prefix.len() < 2 {
            return Err(Error::InvalidParams(
                "M-sequence prefix needs at least M_1 and M_2".into(),
            ));
        }
        if prefix[0] != 1 {
            return Err(Error::InvalidParams(format!(
                "M_1 must be 1, got {}",
                prefix[0]
            )));
        }
        for (idx, w) in prefix.windows(2).enumerate() {
            let n = idx as u64 + 1;
            if w[1] <= w[0] {
                return Err(Error::InvalidParams(format!(
                    "M-sequence must be strictly increasing (M_{} = {} <= M_{} = {})",
                    n + 1,
                    w[1],
                    n,
                    w[0]
                )));
            }
            if (w[1] as u128) < n as u128 * w[0] as u128 {
                return Err(Error::InvalidParams(format!(
                    "M-sequence must satisfy M_{{n+1}} >= n·M_n (fails at n = {n})"
                )));
            }
        }
        Ok(MSequence {
            prefix,
            growth_floor: 2,
        })
    }

    pub fn with_growth_floor(mut self, g: u64) -> Result<Self> {
        if g < 2 {
            return Err(Error::InvalidParams(format!("growth floor must be at least 2, got {g}")));
        }
        self.growth_floor = g;
        Ok(self)
    }

    pub fn growth_floor(&self) -> u64 {
        self.growth_floor
    }

    /// `M_1 = 1`, `M_2 = max(⌈2/s⌉, 2)`.
    pub fn default_for(s: &BigRational) -> Result<Self> {
        if !s.is_positive() {
            return Err(Error::InvalidParams("s must be positive".into()));
        }
        let two_over_s = BigRational::from_integer(BigInt::from(2)) / s;
        let m2 = two_over_s
            .ceil()
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::InvalidParams("⌈2/s⌉ overflows".into()))?
            .max(2);
        MSequence::new(vec![1, m2])
    }

    /// The prefix `(1, 4)` used for the density-one construction.
    pub fn default_full() -> Self {
        MSequence {
            prefix: vec![1, 4],
            growth_floor: 2,
        }
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    /// `M_n` for `n >= 1`, or `None` on `u64` overflow.
    pub fn term(&self, n: usize) -> Option<u64> {
        assert!(n >= 1, "M-sequence is 1-indexed");
        if n <= self.prefix.len() {
            return Some(self.prefix[n - 1]);
        }
        let mut m = *self.prefix.last()?;
        for k in self.prefix.len()..n {
            m = m.checked_mul((k as u64).max(self.growth_floor))?;
        }
        Some(m)
    }
}

/// Which of the two block rules a construction follows.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// Lower density `s ∈ (0, 1)`.
    Fractional(BigRational),
    /// Lower density 1.
    Full,
}

/// One materialized segment `[lower + 1, upper]` with `lower = M_j`, `upper = M_{j+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub index: u64,
    pub lower: u64,
    pub upper: u64,
    /// Last element of the leading run; equals `lower` when the run is empty.
    pub run_end: u64,
    /// `♯(S ∩ [1, lower])`.
    pub count_before: u64,
}

impl Segment {
    pub fn count(&self) -> u64 {
        self.run_end - self.lower + 1
    }

    pub fn run_len(&self) -> u64 {
        self.run_end - self.lower
    }
}

#[derive(Debug)]
pub struct Construction {
    profile: Profile,
    m: MSequence,
    segments: RwLock<Vec<Segment>>,
}

impl Construction {
    fn new(profile: Profile, m: MSequence) -> Result<Self> {
        if let Profile::Fractional(s) = &profile {
            let m2 = BigRational::from_integer(BigInt::from(m.prefix[1]));
            if s * m2 <= BigRational::one() {
                return Err(Error::InvalidParams(format!(
                    "need s·M_2 > 1 (s = {s}, M_2 = {})",
                    m.prefix[1]
                )));
            }
        }
        let c = Construction {
            profile,
            m,
            segments: RwLock::new(Vec::new()),
        };
        c.validate_prefix(EAGER_SEGMENTS)?;
        Ok(c)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn m_sequence(&self) -> &MSequence {
        &self.m
    }

    pub fn describe(&self) -> String {
        match &self.profile {
            Profile::Fractional(s) => format!("s={s}, M={:?}", self.m.prefix),
            Profile::Full => format!("s=1, M={:?}", self.m.prefix),
        }
    }

    /// Limit of `♯(S ∩ [1, N]) / N` along `N = M_{2i}`.
    pub fn lower_density(&self) -> f64 {
        match &self.profile {
            Profile::Fractional(s) => s.to_f64().unwrap_or(f64::NAN),
            Profile::Full => 1.0,
        }
    }

    fn m_term(&self, n: usize) -> Result<u64> {
        self.m.term(n).ok_or_else(|| {
            Error::InvalidParams(format!("M_{n} overflows 64-bit positions"))
        })
    }

    /// `⌊f_i · M_{2i}⌋`: the prescribed count through `M_{2i}`.
    pub fn odd_target(&self, i: u64) -> Result<u64> {
        let m = BigUint::from(self.m_term(2 * i as usize)?);
        let v = match &self.profile {
            Profile::Fractional(s) => floor_times(s, &m),
            Profile::Full => (BigUint::from(2 * i - 1) * m) / BigUint::from(2 * i),
        };
        Ok(v.to_u64().expect("floor below M fits in u64"))
    }

    /// `⌊c_i · (M_{2i+1} - M_{2i})⌋`: members placed in the even segment `2i`.
    pub fn even_count(&self, i: u64) -> Result<u64> {
        let lo = self.m_term(2 * i as usize)?;
        let hi = self.m_term(2 * i as usize + 1)?;
        let gap = (hi - lo) as u128;
        let (num, den) = match self.profile {
            Profile::Fractional(_) => (2 * i as u128 - 1, 2 * i as u128),
            Profile::Full => (2 * i as u128, 2 * i as u128 + 1),
        };
        Ok((num * gap / den) as u64)
    }

    fn build_segment(&self, index: u64, count_before: u64) -> Result<Segment> {
        let lower = self.m_term(index as usize)?;
        let upper = self.m_term(index as usize + 1)?;
        let width = upper - lower;
        let members = if index % 2 == 1 {
            let i = index.div_ceil(2);
            let target = self.odd_target(i)?;
            // target - L where L = ♯(S ∩ [1, M_{2i-1}])
            if target <= count_before {
                return Err(Error::InvalidBlock {
                    i: index,
                    reason: format!(
                        "⌊f·M_{}⌋ = {target} does not exceed the {count_before} members already placed",
                        2 * i
                    ),
                });
            }
            target - count_before
        } else {
            let count = self.even_count(index / 2)?;
            if count == 0 {
                return Err(Error::InvalidBlock {
                    i: index,
                    reason: "block count rounds down to zero".into(),
                });
            }
            if count >= width {
                return Err(Error::InvalidBlock {
                    i: index,
                    reason: "block leaves no gap in its segment".into(),
                });
            }
            count
        };
        if members > width {
            return Err(Error::InvalidBlock {
                i: index,
                reason: format!(
                    "{members} members do not fit in segment [{}, {upper}]",
                    lower + 1
                ),
            });
        }
        Ok(Segment {
            index,
            lower,
            upper,
            run_end: lower + members - 1,
            count_before,
        })
    }

    /// Ensures the first `count` segments are materialized.
    fn materialize_segments(&self, count: usize) -> Result<()> {
        if self.segments.read().expect("segment table poisoned").len() >= count {
            return Ok(());
        }
        let mut table = self.segments.write().expect("segment table poisoned");
        while table.len() < count {
            let before = table.last().map_or(0, |s| s.count_before + s.count());
            let seg = self.build_segment(table.len() as u64 + 1, before)?;
            table.push(seg);
        }
        Ok(())
    }

    /// Materializes up to `count` segments, stopping quietly where `M` leaves `u64`.
    fn validate_prefix(&self, count: usize) -> Result<()> {
        let reachable = (1..=count + 1)
            .take_while(|&n| self.m.term(n).is_some())
            .count()
            .saturating_sub(1);
        self.materialize_segments(count.min(reachable))
    }

    /// Ensures materialized segments reach position `n`.
    fn materialize_through(&self, n: u64) -> Result<()> {
        {
            let table = self.segments.read().expect("segment table poisoned");
            if table.last().is_some_and(|s| s.upper >= n) {
                return Ok(());
            }
        }
        let mut table = self.segments.write().expect("segment table poisoned");
        while table.last().is_none_or(|s| s.upper < n) {
            let before = table.last().map_or(0, |s| s.count_before + s.count());
            let seg = self.build_segment(table.len() as u64 + 1, before)?;
            table.push(seg);
        }
        Ok(())
    }

    fn segment_for(&self, n: u64) -> Result<Segment> {
        debug_assert!(n >= 2);
        self.materialize_through(n)?;
        let table = self.segments.read().expect("segment table poisoned");
        let idx = table.partition_point(|s| s.upper < n);
        Ok(table[idx])
    }

    pub fn contains(&self, n: u64) -> Result<bool> {
        if n <= 1 {
            return Ok(false);
        }
        let seg = self.segment_for(n)?;
        Ok(n <= seg.run_end || n == seg.upper)
    }

    pub fn count_upto(&self, n: u64) -> Result<u64> {
        if n <= 1 {
            return Ok(0);
        }
        let seg = self.segment_for(n)?;
        let in_run = n.min(seg.run_end) - seg.lower;
        let endpoint = u64::from(n == seg.upper);
        Ok(seg.count_before + in_run + endpoint)
    }

    /// Copies of the first `count` segments.
    pub fn segments(&self, count: usize) -> Result<Vec<Segment>> {
        self.materialize_segments(count)?;
        Ok(self.segments.read().expect("segment table poisoned")[..count].to_vec())
    }

    /// The first `count` segments recomputed without touching the lazy table.
    pub fn segments_from_scratch(&self, count: usize) -> Result<Vec<Segment>> {
        let mut out: Vec<Segment> = Vec::with_capacity(count);
        for j in 1..=count as u64 {
            let before = out.last().map_or(0, |s| s.count_before + s.count());
            out.push(self.build_segment(j, before)?);
        }
        Ok(out)
    }

    /// `M_{2i} <= limit`.
    pub fn even_boundaries(&self, limit: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        for i in 1.. {
            match self.m.term(2 * i) {
                Some(m) if m <= limit => out.push(m),
                _ => break,
            }
        }
        Ok(out)
    }

    /// `(i, M_{2i}, ♯(S ∩ [1, M_{2i}]), ⌊f_i M_{2i}⌋)` for `i = 1..=levels`.
    pub fn count_identity(&self, levels: u64) -> Result<Vec<IdentityRow>> {
        (1..=levels)
            .map(|i| {
                let boundary = self.m_term(2 * i as usize)?;
                Ok(IdentityRow {
                    i,
                    boundary,
                    count: self.count_upto(boundary)?,
                    target: self.odd_target(i)?,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub i: u64,
    pub boundary: u64,
    pub count: u64,
    pub target: u64,
}

impl IdentityRow {
    pub fn holds(&self) -> bool {
        self.count == self.target
    }
}

fn floor_times(s: &BigRational, m: &BigUint) -> BigUint {
    let prod = s * BigRational::from_integer(BigInt::from(m.clone()));
    prod.floor()
        .to_integer()
        .to_biguint()
        .expect("non-negative product")
}

/// Reads `s` through its shortest decimal representation, so `0.3` becomes `3/10`.
pub fn decimal_ratio(s: f64) -> Result<BigRational> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidParams(format!(
            "s must be a finite non-negative number, got {s}"
        )));
    }
    let text = format!("{s}");
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits
        .parse()
        .map_err(|_| Error::InvalidParams(format!("cannot read s = {s}")))?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(numer, denom))
}

/// Default construction for `s ∈ (0, 1)`: `M_2 = max(⌈2/s⌉, 2)` and the smallest
/// growth floor `g` whose segments all validate.
///
/// Once every ratio `M_{n+1}/M_n` is at least `2/s` and `2/(1-s)`, every later
/// block is valid, so checking segments up to that index settles the whole sequence.
fn default_case1(s: BigRational) -> Result<Construction> {
    let base = MSequence::default_for(&s)?;
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let threshold = std::cmp::max((&two / &s).ceil(), (&two / (&one - &s)).ceil())
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidParams("s is too close to 0 or 1".into()))?;
    let needed = threshold as usize + 2;
    let mut last_err = None;
    for g in 2..=threshold.max(2) {
        let m = base.clone().with_growth_floor(g)?;
        let c = Construction {
            profile: Profile::Fractional(s.clone()),
            m,
            segments: RwLock::new(Vec::new()),
        };
        match c.validate_prefix(needed) {
            Ok(()) => return Ok(c),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::InvalidParams("no valid M-sequence".into())))
}

/// Lower density `s ∈ (0, 1)`, window density 1.
pub fn build_case1(s: f64, m: Option<MSequence>) -> Result<PositionSet> {
    let ratio = decimal_ratio(s)?;
    if ratio.is_zero() || ratio >= BigRational::one() {
        return Err(Error::InvalidParams(format!("case 1 needs 0 < s < 1, got {s}")));
    }
    let c = match m {
        Some(m) => Construction::new(Profile::Fractional(ratio), m)?,
        None => default_case1(ratio)?,
    };
    Ok(PositionSet::Case1(Arc::new(c)))
}

/// `⋃ {n³+1, .., n³+n}`: lower density 0, window density 1.
pub fn build_case2() -> PositionSet {
    PositionSet::CubeBlocks
}

/// Lower density 1 with an infinite complement.
pub fn build_case3(m: Option<MSequence>) -> Result<PositionSet> {
    let m = m.unwrap_or_else(MSequence::default_full);
    let c = Construction::new(Profile::Full, m)?;
    Ok(PositionSet::Case3(Arc::new(c)))
}

/// Dispatches on `s`: 0 → cube blocks, `(0, 1)` → case 1, 1 → case 3.
pub fn build_for_dimension(s: f64, m: Option<MSequence>) -> Result<PositionSet> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParams(format!("s must lie in [0, 1], got {s}")));
    }
    if s == 0.0 {
        Ok(build_case2())
    } else if s == 1.0 {
        build_case3(m)
    } else {
        build_case1(s, m)
    }
}

/// `{1/n³ : 1 <= n <= n_max}`, ascending.
pub fn fraser_yu_fixture(n_max: u64) -> Result<Vec<BigRational>> {
    if n_max < 3 {
        return Err(Error::InvalidParams(format!("n_max must be at least 3, got {n_max}")));
    }
    Ok((1..=n_max)
        .rev()
        .map(|n| {
            let cube = BigInt::from(n).pow(3);
            BigRational::new(BigInt::one(), cube)
        })
        .collect())
}
