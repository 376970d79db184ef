//! Exact rationals as `"p/q"` strings in serialized output.

use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serializer};

pub fn parse_rational(s: &str) -> Option<BigRational> {
    BigRational::from_str(s.trim()).ok()
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

pub mod opt_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        match Option::<String>::deserialize(d)? {
            Some(s) => parse_rational(&s)
                .map(Some)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}"))),
            None => Ok(None),
        }
    }
}

pub mod rational_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&format_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| {
                parse_rational(s)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
            })
            .collect()
    }
}

/// `f64` written with 17 significant digits, which round-trips exactly.
pub mod f64_17 {
    use super::*;

    pub fn format(v: f64) -> String {
        format!("{v:.16e}")
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Complex value as an `[re, im]` pair of 17-significant-digit strings.
pub mod complex17 {
    use super::*;
    use num_complex::Complex64;
    use serde::Serialize;

    pub fn serialize<S: Serializer>(v: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [f64_17::format(v.re), f64_17::format(v.im)].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[String; 2]>::deserialize(d)?;
        let re: f64 = re.parse().map_err(serde::de::Error::custom)?;
        let im: f64 = im.parse().map_err(serde::de::Error::custom)?;
        Ok(Complex64::new(re, im))
    }
}
