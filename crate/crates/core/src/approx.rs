//! Finite-depth approximations of `E_{S,D}`.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::digits::{BAdicPoint, DigitString, DigitSystem};
use crate::error::{Error, Result};
use crate::positions::PositionSet;

/// Default cap on the number of strings an enumeration may produce.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 24;

/// Admissible digits at position `n`: everything if `n ∈ S`, otherwise `D`.
pub fn alphabet(system: &DigitSystem, positions: &PositionSet, n: u64) -> Result<Vec<u8>> {
    if positions.contains(n)? {
        Ok((0..system.base()).map(|d| d as u8).collect())
    } else {
        Ok(system.allowed().to_vec())
    }
}

/// Whether every restricted position `j ∉ S` of `x` carries a digit of `D`.
pub fn is_member(system: &DigitSystem, x: &DigitString, positions: &PositionSet) -> Result<bool> {
    if x.base() != system.base() {
        return Err(Error::InvalidParams(format!(
            "digit string is in base {}, system is base {}",
            x.base(),
            system.base()
        )));
    }
    positions.check_horizon(x.len() as u64)?;
    for (idx, &d) in x.digits().iter().enumerate() {
        if !system.is_allowed(d) && !positions.contains(idx as u64 + 1)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `M_n = b^{♯(S∩[1,n])} · (♯D)^{n - ♯(S∩[1,n])}`.
pub fn basic_interval_count(
    system: &DigitSystem,
    positions: &PositionSet,
    depth: u64,
) -> Result<BigUint> {
    let free = positions.count_upto(depth)?;
    let restricted = depth - free;
    let free = u32::try_from(free).map_err(|_| Error::InvalidParams("depth too large".into()))?;
    let restricted =
        u32::try_from(restricted).map_err(|_| Error::InvalidParams("depth too large".into()))?;
    Ok(BigUint::from(system.base()).pow(free)
        * BigUint::from(system.allowed_count()).pow(restricted))
}

/// All admissible digit strings of one depth, in increasing order of value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub system: DigitSystem,
    pub depth: u64,
    pub members: Vec<DigitString>,
}

impl Approximation {
    /// Left endpoints of the basic intervals of order `depth`.
    pub fn endpoints(&self) -> Vec<BAdicPoint> {
        self.members.iter().map(DigitString::value).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Enumerates every admissible string of length `depth`.
///
/// Fails with `BudgetExceeded` (reporting `M_n`) before allocating anything when
/// `M_n` is larger than `budget`.
pub fn enumerate_approximation(
    system: &DigitSystem,
    positions: &PositionSet,
    depth: u64,
    budget: u64,
) -> Result<Approximation> {
    if depth == 0 {
        return Err(Error::InvalidParams("depth must be at least 1".into()));
    }
    let count = basic_interval_count(system, positions, depth)?;
    let fits = count.to_u64().filter(|&c| c <= budget);
    let Some(count) = fits else {
        return Err(Error::BudgetExceeded {
            what: "enumeration",
            required: count.to_string(),
            budget,
        });
    };
    let alphabets: Vec<Vec<u8>> = (1..=depth)
        .map(|n| alphabet(system, positions, n))
        .collect::<Result<_>>()?;

    // odometer over the per-position alphabets, last position fastest
    let mut members = Vec::with_capacity(count as usize);
    let mut cursor = vec![0usize; depth as usize];
    loop {
        let digits: Vec<u8> = cursor
            .iter()
            .zip(&alphabets)
            .map(|(&i, a)| a[i])
            .collect();
        members.push(DigitString::from_raw(system.base(), digits));
        let mut pos = depth as usize;
        loop {
            if pos == 0 {
                debug_assert_eq!(members.len() as u64, count);
                return Ok(Approximation {
                    system: system.clone(),
                    depth,
                    members,
                });
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < alphabets[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
    }
}

/// Canonical completion digit at position `n`: 0 if `n ∈ S`, `min(D)` otherwise.
pub fn canonical_digit(system: &DigitSystem, positions: &PositionSet, n: u64) -> Result<u8> {
    Ok(if positions.contains(n)? {
        0
    } else {
        system.min_allowed()
    })
}

/// Extends `prefix` to length `tail_depth` with canonical digits.
pub fn canonical_completion(
    system: &DigitSystem,
    prefix: &DigitString,
    positions: &PositionSet,
    tail_depth: u64,
) -> Result<DigitString> {
    if (prefix.len() as u64) > tail_depth {
        return Err(Error::InvalidParams(format!(
            "prefix of length {} is longer than the tail depth {tail_depth}",
            prefix.len()
        )));
    }
    positions.check_horizon(tail_depth)?;
    if !is_member(system, prefix, positions)? {
        return Err(Error::InvalidParams(format!(
            "prefix {prefix} is not admissible"
        )));
    }
    let mut digits = prefix.digits().to_vec();
    for n in prefix.len() as u64 + 1..=tail_depth {
        digits.push(canonical_digit(system, positions, n)?);
    }
    Ok(DigitString::from_raw(system.base(), digits))
}

/// The exact value of the canonical completion of `prefix`.
pub fn canonical_point(
    system: &DigitSystem,
    prefix: &DigitString,
    positions: &PositionSet,
    tail_depth: u64,
) -> Result<BAdicPoint> {
    Ok(canonical_completion(system, prefix, positions, tail_depth)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn sys(b: u32, d: &[u32]) -> DigitSystem {
        DigitSystem::new(b, d).unwrap()
    }

    fn ds(b: u32, d: &[u8]) -> DigitString {
        DigitString::new(b, d.to_vec()).unwrap()
    }

    #[test]
    fn membership_examples() {
        let odds = PositionSet::odds();
        assert!(is_member(&sys(2, &[0]), &ds(2, &[1, 0, 1, 0]), &odds).unwrap());
        assert!(!is_member(&sys(2, &[0]), &ds(2, &[0, 1]), &odds).unwrap());
        assert!(is_member(&sys(3, &[0, 2]), &ds(3, &[1, 2, 0]), &odds).unwrap());
        assert!(is_member(&sys(2, &[0]), &ds(3, &[0]), &odds).is_err());
    }

    #[test]
    fn membership_respects_horizon() {
        let s = PositionSet::explicit(&[1], 2).unwrap();
        assert!(is_member(&sys(2, &[0]), &ds(2, &[1, 0]), &s).unwrap());
        assert!(matches!(
            is_member(&sys(2, &[0]), &ds(2, &[1, 0, 0]), &s),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn enumerates_odds_depth_four() {
        let a = enumerate_approximation(&sys(2, &[0]), &PositionSet::odds(), 4, 1 << 10).unwrap();
        let values: Vec<String> = a.endpoints().iter().map(|p| p.normalized().to_string()).collect();
        assert_eq!(values, vec!["0/2^0", "1/2^3", "1/2^1", "5/2^3"]);
    }

    #[test]
    fn count_formula_base_three() {
        let s = sys(3, &[0, 2]);
        let a = enumerate_approximation(&s, &PositionSet::odds(), 2, 1 << 10).unwrap();
        assert_eq!(a.len(), 6);
        assert_eq!(basic_interval_count(&s, &PositionSet::odds(), 2).unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn budget_reports_the_count() {
        let err = enumerate_approximation(&sys(2, &[0]), &PositionSet::odds(), 40, 1000).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExceeded {
                what: "enumeration",
                required: (1u64 << 20).to_string(),
                budget: 1000
            }
        );
    }

    #[test]
    fn canonical_point_examples() {
        let odds = PositionSet::odds();
        let p = canonical_point(&sys(2, &[0]), &ds(2, &[1]), &odds, 4).unwrap();
        assert_eq!(p.normalized().to_string(), "1/2^1");

        let full = canonical_completion(&sys(3, &[2]), &DigitString::empty(3), &odds, 2).unwrap();
        assert_eq!(full.digits(), &[0, 2]);
        assert_eq!(full.value().to_string(), "2/3^2");

        let cubes = PositionSet::cube_blocks();
        let full = canonical_completion(&sys(2, &[0]), &ds(2, &[0, 1]), &cubes, 3).unwrap();
        assert_eq!(full.digits(), &[0, 1, 0]);
        assert_eq!(full.value().normalized().to_string(), "1/2^2");
    }

    #[test]
    fn canonical_point_rejects_bad_prefixes() {
        let odds = PositionSet::odds();
        assert!(canonical_point(&sys(2, &[0]), &ds(2, &[0, 1]), &odds, 4).is_err());
        assert!(canonical_point(&sys(2, &[0]), &ds(2, &[1, 0, 1]), &odds, 2).is_err());
    }
}
