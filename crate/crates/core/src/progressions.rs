//! Runs of consecutive positions and arithmetic progressions inside `E_{S,D}`.
//!
//! A run `{p+1, .., p+R} ⊆ S` frees `R` consecutive digits. Fixing every other
//! digit and letting the free block count `0, 1, .., b^R - 1` produces `b^R`
//! points of `E_{S,D}` spaced exactly `b^{-(p+R)}` apart, so unbounded runs
//! give arbitrarily long progressions.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{canonical_digit, is_member};
use crate::digits::{DigitString, DigitSystem};
use crate::error::{Error, Result};
use crate::exact;
use crate::positions::PositionSet;

/// Default cap on the number of points handed to the quadratic search.
pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000;

/// A block `{start, .., start + len - 1}` of consecutive members of `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunBlock {
    pub start: u64,
    pub len: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub from: u64,
    pub to: u64,
    /// Elements in the longest block of consecutive members inside `[from, to]`.
    pub longest_run_elements: u64,
    /// The same block measured in successor steps (elements - 1); `None` when
    /// `S ∩ [from, to]` is empty.
    pub longest_run_steps: Option<u64>,
    /// Leftmost longest block.
    pub witness: Option<RunBlock>,
}

/// Longest block of consecutive members of `S` inside `[from, to]`.
pub fn max_run(positions: &PositionSet, from: u64, to: u64) -> Result<RunReport> {
    if from == 0 || from > to {
        return Err(Error::InvalidParams(format!(
            "need 1 <= from <= to, got [{from}, {to}]"
        )));
    }
    positions.check_horizon(to)?;
    let mut best: Option<RunBlock> = None;
    let mut current = 0u64;
    for n in from..=to {
        if positions.contains(n)? {
            current += 1;
            if best.is_none_or(|b| current > b.len) {
                best = Some(RunBlock {
                    start: n + 1 - current,
                    len: current,
                });
            }
        } else {
            current = 0;
        }
    }
    let elements = best.map_or(0, |b| b.len);
    Ok(RunReport {
        from,
        to,
        longest_run_elements: elements,
        longest_run_steps: best.map(|b| b.len - 1),
        witness: best,
    })
}

/// `max_run` over a family of intervals `[k_j + 1, k_j + m_j]`.
pub fn run_growth(positions: &PositionSet, intervals: &[(u64, u64)]) -> Result<Vec<RunReport>> {
    intervals
        .par_iter()
        .map(|&(from, to)| max_run(positions, from, to))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArithmeticProgression {
    #[serde(with = "exact::rational")]
    pub start: BigRational,
    #[serde(with = "exact::rational")]
    pub gap: BigRational,
    pub length: usize,
    /// Digit strings of the terms, when the progression was built from digits.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<DigitString>,
    /// The run of free positions the progression was built on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunBlock>,
}

impl ArithmeticProgression {
    pub fn points(&self) -> Vec<BigRational> {
        (0..self.length)
            .map(|i| &self.start + &self.gap * BigInt::from(i))
            .collect()
    }
}

/// Smallest `R` with `b^R >= k`.
pub fn digits_needed(base: u32, k: u64) -> u64 {
    let mut r = 0;
    let mut reach = 1u128;
    while reach < k as u128 {
        reach *= base as u128;
        r += 1;
    }
    r
}

/// Builds a `k`-term progression in `E_{S,D}` from the leftmost run of
/// `⌈log_b k⌉` consecutive positions of `S` ending at or before `horizon`.
///
/// Every term is a full digit string of length `tail_depth` (default: the end of
/// the run) and is checked against the membership predicate.
pub fn construct_ap(
    system: &DigitSystem,
    positions: &PositionSet,
    k: u64,
    horizon: u64,
    tail_depth: Option<u64>,
) -> Result<ArithmeticProgression> {
    if k < 3 {
        return Err(Error::InvalidParams(format!("progression length must be at least 3, got {k}")));
    }
    let base = system.base();
    let needed = digits_needed(base, k);
    let Some(start) = positions.first_run(needed, horizon)? else {
        let longest = max_run(positions, 1, horizon.max(1))?.longest_run_elements;
        return Err(Error::RunNotFound {
            needed,
            horizon,
            longest,
        });
    };
    let prefix_len = start - 1;
    let last = prefix_len + needed;
    let depth = tail_depth.unwrap_or(last);
    if depth < last {
        return Err(Error::InvalidParams(format!(
            "tail depth {depth} ends before the run {start}..={last}"
        )));
    }
    positions.check_horizon(depth)?;

    let prefix: Vec<u8> = (1..=prefix_len)
        .map(|n| canonical_digit(system, positions, n))
        .collect::<Result<_>>()?;
    let tail: Vec<u8> = (last + 1..=depth)
        .map(|n| canonical_digit(system, positions, n))
        .collect::<Result<_>>()?;

    let mut witnesses = Vec::with_capacity(k as usize);
    for i in 0..k {
        let mut digits = prefix.clone();
        let mut block = vec![0u8; needed as usize];
        let mut rest = i;
        for slot in block.iter_mut().rev() {
            *slot = (rest % base as u64) as u8;
            rest /= base as u64;
        }
        digits.extend_from_slice(&block);
        digits.extend_from_slice(&tail);
        let x = DigitString::new(base, digits)?;
        if !is_member(system, &x, positions)? {
            return Err(Error::InvalidParams(format!("term {i} failed membership")));
        }
        witnesses.push(x);
    }

    let values: Vec<BigRational> = witnesses.iter().map(|w| w.value().to_rational()).collect();
    let gap = BigRational::new(BigInt::one(), BigInt::from(BigUint::from(base).pow(last as u32)));
    debug_assert!(values.windows(2).all(|w| &w[1] - &w[0] == gap));
    Ok(ArithmeticProgression {
        start: values[0].clone(),
        gap,
        length: k as usize,
        witnesses,
        run: Some(RunBlock { start, len: needed }),
    })
}

/// Points scaled to a common denominator, with a hash index for membership.
struct Indexed {
    ints: Vec<BigInt>,
    set: HashSet<BigInt>,
    denom: BigInt,
}

impl Indexed {
    fn new(points: &[BigRational], budget: u64) -> Result<Self> {
        if points.len() as u64 > budget {
            return Err(Error::BudgetExceeded {
                what: "progression search",
                required: points.len().to_string(),
                budget,
            });
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "points must be distinct and sorted ascending".into(),
            ));
        }
        let denom = points
            .iter()
            .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let ints: Vec<BigInt> = points
            .iter()
            .map(|p| p.numer() * (&denom / p.denom()))
            .collect();
        let set = ints.iter().cloned().collect();
        Ok(Indexed { ints, set, denom })
    }

    /// Whether `x_i + t·g` is present for `t = 2, .., k-1`.
    fn extends(&self, start: &BigInt, gap: &BigInt, k: usize) -> bool {
        let mut x = start + gap;
        for _ in 2..k {
            x += gap;
            if !self.set.contains(&x) {
                return false;
            }
        }
        true
    }

    /// Number of terms of the progression `start, start + gap, ..` present.
    fn run_length(&self, start: &BigInt, gap: &BigInt) -> usize {
        let mut len = 1;
        let mut x = start + gap;
        while self.set.contains(&x) {
            len += 1;
            x += gap;
        }
        len
    }

    /// Lexicographically smallest `(start, gap)` index pair of a `k`-term progression.
    fn find(&self, k: usize) -> Option<(usize, usize)> {
        let max = self.ints.last()?;
        (0..self.ints.len()).into_par_iter().find_map_first(|i| {
            let xi = &self.ints[i];
            for j in i + 1..self.ints.len() {
                let gap = &self.ints[j] - xi;
                let end = xi + &gap * BigInt::from(k - 1);
                if &end > max {
                    break;
                }
                if self.extends(xi, &gap, k) {
                    return Some((i, j));
                }
            }
            None
        })
    }

    fn progression(&self, i: usize, j: usize, length: usize) -> ArithmeticProgression {
        let gap = &self.ints[j] - &self.ints[i];
        ArithmeticProgression {
            start: BigRational::new(self.ints[i].clone(), self.denom.clone()),
            gap: BigRational::new(gap, self.denom.clone()),
            length,
            witnesses: Vec::new(),
            run: None,
        }
    }
}

/// Exhaustive search for a `k`-term progression among sorted, distinct points.
///
/// Returns the progression with the lexicographically smallest `(start, gap)`.
pub fn search_ap(
    points: &[BigRational],
    k: usize,
    budget: u64,
) -> Result<Option<ArithmeticProgression>> {
    if k < 3 {
        return Err(Error::InvalidParams(format!("progression length must be at least 3, got {k}")));
    }
    let idx = Indexed::new(points, budget)?;
    Ok(idx.find(k).map(|(i, j)| idx.progression(i, j, k)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongestAp {
    pub k_max: usize,
    /// A progression of length `k_max`, present when `k_max >= 3`.
    pub witness: Option<ArithmeticProgression>,
}

/// Length of the longest progression among the points.
///
/// Binary search over `k` with the exhaustive search; each hit is extended
/// greedily, which can only raise the lower bound.
pub fn longest_ap(points: &[BigRational], budget: u64) -> Result<LongestAp> {
    let idx = Indexed::new(points, budget)?;
    let n = points.len();
    if n < 3 {
        return Ok(LongestAp {
            k_max: n,
            witness: None,
        });
    }
    let extend = |(i, j): (usize, usize)| {
        let gap = &idx.ints[j] - &idx.ints[i];
        let len = idx.run_length(&idx.ints[i], &gap);
        idx.progression(i, j, len)
    };
    let Some(first) = idx.find(3) else {
        return Ok(LongestAp {
            k_max: 2,
            witness: None,
        });
    };
    let mut best = extend(first);
    let mut hi = n;
    while best.length < hi {
        let mid = (best.length + hi).div_ceil(2);
        match idx.find(mid) {
            Some(hit) => {
                let ap = extend(hit);
                if ap.length > best.length {
                    best = ap;
                }
            }
            None => hi = mid - 1,
        }
    }
    debug_assert!(best.gap.is_positive());
    Ok(LongestAp {
        k_max: best.length,
        witness: Some(best),
    })
}
