//! Digit systems, finite digit strings and exact b-adic points.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported base; digits are stored as `u8`.
pub const MAX_BASE: u32 = 256;

/// A base `b >= 2` together with the restricted digit alphabet `D`.
///
/// `D` is a nonempty proper subset of `{0, .., b-1}`, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDigitSystem", into = "RawDigitSystem")]
pub struct DigitSystem {
    base: u32,
    allowed: Vec<u8>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDigitSystem {
    base: u32,
    digits: Vec<u32>,
}

impl TryFrom<RawDigitSystem> for DigitSystem {
    type Error = Error;

    fn try_from(raw: RawDigitSystem) -> Result<Self> {
        DigitSystem::new(raw.base, &raw.digits)
    }
}

impl From<DigitSystem> for RawDigitSystem {
    fn from(s: DigitSystem) -> Self {
        RawDigitSystem {
            base: s.base,
            digits: s.allowed.iter().map(|&d| d as u32).collect(),
        }
    }
}

impl DigitSystem {
    /// Validates and builds a digit system. Digits may be given in any order
    /// but must be distinct.
    pub fn new(base: u32, digits: &[u32]) -> Result<Self> {
        if !(2..=MAX_BASE).contains(&base) {
            return Err(Error::InvalidDigitSystem(format!(
                "base must lie in [2, {MAX_BASE}], got {base}"
            )));
        }
        let mut allowed = Vec::with_capacity(digits.len());
        for &d in digits {
            if d >= base {
                return Err(Error::InvalidDigitSystem(format!(
                    "digit {d} is outside [0, {}]",
                    base - 1
                )));
            }
            allowed.push(d as u8);
        }
        allowed.sort_unstable();
        if allowed.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDigitSystem("duplicate digits".into()));
        }
        if allowed.is_empty() || allowed.len() >= base as usize {
            return Err(Error::InvalidDigitSystem(format!(
                "allowed digits must form a nonempty proper subset of {{0..{}}}, got {} digits",
                base - 1,
                allowed.len()
            )));
        }
        Ok(DigitSystem { base, allowed })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// The restricted alphabet `D`, sorted ascending.
    pub fn allowed(&self) -> &[u8] {
        &self.allowed
    }

    /// `♯D`.
    pub fn allowed_count(&self) -> usize {
        self.allowed.len()
    }

    pub fn min_allowed(&self) -> u8 {
        self.allowed[0]
    }

    pub fn is_allowed(&self, digit: u8) -> bool {
        self.allowed.binary_search(&digit).is_ok()
    }

    /// `log(♯D) / log(b)`, exactly zero when `♯D = 1`.
    pub fn base_term(&self) -> f64 {
        if self.allowed.len() == 1 {
            0.0
        } else {
            (self.allowed.len() as f64).ln() / (self.base as f64).ln()
        }
    }

    /// Every valid digit system for `base`, ordered by the bitmask of `D`.
    pub fn all_for_base(base: u32) -> Result<Vec<DigitSystem>> {
        if !(2..=16).contains(&base) {
            return Err(Error::InvalidDigitSystem(format!(
                "refusing to list all digit sets for base {base}"
            )));
        }
        let full = (1u32 << base) - 1;
        (1..full)
            .map(|mask| {
                let digits: Vec<u32> = (0..base).filter(|d| mask & (1 << d) != 0).collect();
                DigitSystem::new(base, &digits)
            })
            .collect()
    }
}

/// A finite digit string `x_1 .. x_n` in base `b`; position `j` is `digits[j - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DigitString {
    base: u32,
    digits: Vec<u8>,
}

impl DigitString {
    pub fn new(base: u32, digits: Vec<u8>) -> Result<Self> {
        if !(2..=MAX_BASE).contains(&base) {
            return Err(Error::InvalidDigitSystem(format!("invalid base {base}")));
        }
        if let Some(&d) = digits.iter().find(|&&d| d as u32 >= base) {
            return Err(Error::InvalidParams(format!(
                "digit {d} out of range for base {base}"
            )));
        }
        Ok(DigitString { base, digits })
    }

    pub fn empty(base: u32) -> Self {
        DigitString {
            base,
            digits: Vec::new(),
        }
    }

    pub(crate) fn from_raw(base: u32, digits: Vec<u8>) -> Self {
        debug_assert!(digits.iter().all(|&d| (d as u32) < base));
        DigitString { base, digits }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Digit at 1-based position `j`.
    pub fn digit(&self, j: usize) -> Option<u8> {
        j.checked_sub(1).and_then(|i| self.digits.get(i).copied())
    }

    /// Exact value `Σ x_j b^{-j}` as an unreduced b-adic point.
    pub fn value(&self) -> BAdicPoint {
        let b = BigUint::from(self.base);
        let numerator = self
            .digits
            .iter()
            .fold(BigUint::zero(), |acc, &d| acc * &b + BigUint::from(d));
        BAdicPoint {
            numerator,
            base: self.base,
            scale: self.digits.len() as u32,
        }
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.base <= 10 { "" } else { "," };
        let parts: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        write!(f, "0.{}", parts.join(sep))
    }
}

/// The exact rational `a / b^n`, stored unreduced.
///
/// Equality and ordering compare the represented values by cross-multiplication,
/// so `1/2^1 == 2/2^2`.
#[derive(Clone, Debug)]
pub struct BAdicPoint {
    numerator: BigUint,
    base: u32,
    scale: u32,
}

impl BAdicPoint {
    pub fn new(numerator: BigUint, base: u32, scale: u32) -> Result<Self> {
        if !(2..=MAX_BASE).contains(&base) {
            return Err(Error::InvalidParams(format!("invalid base {base}")));
        }
        if numerator > BigUint::from(base).pow(scale) {
            return Err(Error::InvalidParams(format!(
                "{numerator}/{base}^{scale} lies outside [0, 1]"
            )));
        }
        Ok(BAdicPoint {
            numerator,
            base,
            scale,
        })
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn denominator(&self) -> BigUint {
        BigUint::from(self.base).pow(self.scale)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.numerator.clone().into(), self.denominator().into())
    }

    /// Lowest-scale representative of the same value.
    pub fn normalized(&self) -> BAdicPoint {
        let b = BigUint::from(self.base);
        let mut numerator = self.numerator.clone();
        let mut scale = self.scale;
        if numerator.is_zero() {
            scale = 0;
        }
        while scale > 0 {
            let (q, r) = numerator.div_rem(&b);
            if !r.is_zero() {
                break;
            }
            numerator = q;
            scale -= 1;
        }
        BAdicPoint {
            numerator,
            base: self.base,
            scale,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.to_rational();
        num_traits::ToPrimitive::to_f64(&r).unwrap_or(f64::NAN)
    }

    /// `b^{-n}` as a point.
    pub fn unit(base: u32, scale: u32) -> Self {
        BAdicPoint {
            numerator: BigUint::one(),
            base,
            scale,
        }
    }
}

impl PartialEq for BAdicPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BAdicPoint {}

impl Ord for BAdicPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = &self.numerator * other.denominator();
        let rhs = &other.numerator * self.denominator();
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for BAdicPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for BAdicPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let r = self.to_rational();
        r.numer().hash(state);
        r.denom().hash(state);
    }
}

impl fmt::Display for BAdicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}^{}", self.numerator, self.base, self.scale)
    }
}

impl FromStr for BAdicPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("cannot parse b-adic point {s:?}"));
        let (num, rest) = s.split_once('/').ok_or_else(bad)?;
        let (base, scale) = rest.split_once('^').ok_or_else(bad)?;
        let numerator = BigUint::from_str(num.trim()).map_err(|_| bad())?;
        let base = base.trim().parse::<u32>().map_err(|_| bad())?;
        let scale = scale.trim().parse::<u32>().map_err(|_| bad())?;
        BAdicPoint::new(numerator, base, scale)
    }
}

impl Serialize for BAdicPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BAdicPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
