//! Sets `S ⊂ {1, 2, ..}` of unrestricted digit positions.

use std::fmt;
use std::sync::Arc;

use crate::constructions::Construction;
use crate::error::{Error, Result};

/// Positions are 1-based; position `n` carries the digit of `b^{-n}`.
#[derive(Clone, Debug)]
pub enum PositionSet {
    /// `n ∈ S` iff `n mod q ∈ R`.
    Periodic(Periodic),
    /// `⋃_{n ≥ 1} {n³+1, .., n³+n}`.
    CubeBlocks,
    /// Block construction with lower density `s ∈ (0, 1)` and full window density.
    Case1(Arc<Construction>),
    /// Block construction with lower density 1.
    Case3(Arc<Construction>),
    /// A finite member list, meaningful only up to its horizon.
    ExplicitTruncated(Truncated),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Periodic {
    period: u64,
    residues: Vec<u64>,
}

impl Periodic {
    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    fn contains(&self, n: u64) -> bool {
        self.residues.binary_search(&(n % self.period)).is_ok()
    }

    fn count_upto(&self, n: u64) -> u64 {
        let q = self.period;
        self.residues
            .iter()
            .map(|&r| {
                if r == 0 {
                    n / q
                } else if n >= r {
                    (n - r) / q + 1
                } else {
                    0
                }
            })
            .sum()
    }

    /// Longest block of consecutive members, counted cyclically.
    pub fn longest_run(&self) -> u64 {
        let q = self.period;
        let mut best = 0;
        let mut current = 0;
        // two passes cover runs that wrap around the period boundary
        for n in 1..=2 * q {
            if self.contains(n) {
                current += 1;
                best = best.max(current);
            } else {
                current = 0;
            }
        }
        best.min(q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncated {
    members: Vec<u64>,
    horizon: u64,
}

impl Truncated {
    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }
}

impl PositionSet {
    pub fn periodic(period: u64, residues: &[u64]) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidPositions("period must be at least 1".into()));
        }
        let mut residues = residues.to_vec();
        residues.sort_unstable();
        residues.dedup();
        if let Some(r) = residues.iter().find(|&&r| r >= period) {
            return Err(Error::InvalidPositions(format!(
                "residue {r} is not below the period {period}"
            )));
        }
        if residues.is_empty() || residues.len() as u64 >= period {
            return Err(Error::InvalidPositions(format!(
                "residue set must be a nonempty proper subset of {{0..{}}}",
                period - 1
            )));
        }
        Ok(PositionSet::Periodic(Periodic { period, residues }))
    }

    /// The odd positions, `Periodic(2, {1})`.
    pub fn odds() -> Self {
        PositionSet::Periodic(Periodic {
            period: 2,
            residues: vec![1],
        })
    }

    pub fn cube_blocks() -> Self {
        PositionSet::CubeBlocks
    }

    pub fn explicit(members: &[u64], horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidPositions("horizon must be at least 1".into()));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPositions(
                "members must be strictly increasing".into(),
            ));
        }
        if let Some(&m) = members.iter().find(|&&m| m == 0 || m > horizon) {
            return Err(Error::InvalidPositions(format!(
                "member {m} lies outside [1, {horizon}]"
            )));
        }
        Ok(PositionSet::ExplicitTruncated(Truncated {
            members: members.to_vec(),
            horizon,
        }))
    }

    /// Upper limit on valid queries, if any.
    pub fn horizon(&self) -> Option<u64> {
        match self {
            PositionSet::ExplicitTruncated(t) => Some(t.horizon),
            _ => None,
        }
    }

    pub fn check_horizon(&self, n: u64) -> Result<()> {
        match self.horizon() {
            Some(h) if n > h => Err(Error::HorizonExceeded {
                requested: n,
                horizon: h,
            }),
            _ => Ok(()),
        }
    }

    /// `n ∈ S`.
    pub fn contains(&self, n: u64) -> Result<bool> {
        if n == 0 {
            return Err(Error::InvalidParams("positions start at 1".into()));
        }
        self.check_horizon(n)?;
        match self {
            PositionSet::Periodic(p) => Ok(p.contains(n)),
            PositionSet::CubeBlocks => Ok(cube_contains(n)),
            PositionSet::Case1(c) | PositionSet::Case3(c) => c.contains(n),
            PositionSet::ExplicitTruncated(t) => Ok(t.members.binary_search(&n).is_ok()),
        }
    }

    /// `♯(S ∩ {1, .., n})`; zero for `n = 0`.
    pub fn count_upto(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Ok(0);
        }
        self.check_horizon(n)?;
        match self {
            PositionSet::Periodic(p) => Ok(p.count_upto(n)),
            PositionSet::CubeBlocks => Ok(cube_count_upto(n)),
            PositionSet::Case1(c) | PositionSet::Case3(c) => c.count_upto(n),
            PositionSet::ExplicitTruncated(t) => Ok(t.members.partition_point(|&m| m <= n) as u64),
        }
    }

    /// Members of `S ∩ {1, .., n}` in increasing order.
    pub fn members_upto(&self, n: u64) -> Result<Vec<u64>> {
        self.check_horizon(n)?;
        if let PositionSet::ExplicitTruncated(t) = self {
            return Ok(t.members.iter().copied().take_while(|&m| m <= n).collect());
        }
        let mut out = Vec::new();
        for j in 1..=n {
            if self.contains(j)? {
                out.push(j);
            }
        }
        Ok(out)
    }

    /// Start of the leftmost block `{p+1, .., p+len} ⊆ S` with `p + len <= limit`.
    pub fn first_run(&self, len: u64, limit: u64) -> Result<Option<u64>> {
        self.check_horizon(limit)?;
        if len == 0 {
            return Ok(Some(1));
        }
        if let PositionSet::CubeBlocks = self {
            // block n has exactly n elements and blocks never touch
            let start = len.checked_pow(3).and_then(|c| c.checked_add(1));
            return Ok(start.filter(|s| s + len - 1 <= limit));
        }
        let mut current = 0;
        for n in 1..=limit {
            if self.contains(n)? {
                current += 1;
                if current == len {
                    return Ok(Some(n + 1 - len));
                }
            } else {
                current = 0;
            }
        }
        Ok(None)
    }

    /// Whether `S` is known to contain arbitrarily long runs of consecutive integers.
    pub fn has_unbounded_runs(&self) -> bool {
        matches!(
            self,
            PositionSet::CubeBlocks | PositionSet::Case1(_) | PositionSet::Case3(_)
        )
    }

    /// `Some(true)` when the complement of `S` is provably infinite, `None` for truncated sets.
    pub fn has_infinite_complement(&self) -> Option<bool> {
        match self {
            PositionSet::ExplicitTruncated(_) => None,
            _ => Some(true),
        }
    }

    /// Checkpoints `N <= limit` along which the lower density is attained:
    /// period multiples, cubes `n³`, or the construction boundaries `M_{2i}`.
    pub fn structural_checkpoints(&self, limit: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        match self {
            PositionSet::Periodic(p) => {
                let mut n = p.period;
                while n <= limit {
                    out.push(n);
                    n = match n.checked_mul(2) {
                        Some(v) => v,
                        None => break,
                    };
                }
            }
            PositionSet::CubeBlocks => {
                for c in 1u64.. {
                    match c.checked_pow(3) {
                        Some(v) if v <= limit => out.push(v),
                        _ => break,
                    }
                }
            }
            PositionSet::Case1(c) | PositionSet::Case3(c) => {
                out = c.even_boundaries(limit)?;
            }
            PositionSet::ExplicitTruncated(t) => {
                let limit = limit.min(t.horizon);
                let mut n = 1u64;
                while n <= limit {
                    out.push(n);
                    n *= 2;
                }
                if out.last() != Some(&limit) && limit > 0 {
                    out.push(limit);
                }
            }
        }
        Ok(out)
    }

    pub fn construction(&self) -> Option<&Construction> {
        match self {
            PositionSet::Case1(c) | PositionSet::Case3(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for PositionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositionSet::Periodic(p) => write!(f, "periodic(q={}, R={:?})", p.period, p.residues),
            PositionSet::CubeBlocks => write!(f, "cube-blocks"),
            PositionSet::Case1(c) => write!(f, "case1({})", c.describe()),
            PositionSet::Case3(c) => write!(f, "case3({})", c.describe()),
            PositionSet::ExplicitTruncated(t) => {
                write!(f, "explicit({} members, horizon {})", t.members.len(), t.horizon)
            }
        }
    }
}

/// Largest `c` with `c³ <= n`.
pub(crate) fn icbrt(n: u64) -> u64 {
    let mut c = (n as f64).cbrt() as u64;
    while c > 0 && c.checked_pow(3).is_none_or(|v| v > n) {
        c -= 1;
    }
    while (c + 1).checked_pow(3).is_some_and(|v| v <= n) {
        c += 1;
    }
    c
}

fn cube_contains(n: u64) -> bool {
    let j = icbrt(n - 1);
    j >= 1 && n <= j * j * j + j
}

fn cube_count_upto(n: u64) -> u64 {
    let c = icbrt(n);
    if c == 0 {
        return 0;
    }
    c * (c - 1) / 2 + c.min(n - c * c * c)
}
