//! Exact rational arithmetic helpers.
//!
//! Probabilities and expectations are `BigRational`s throughout; they are
//! rendered as `"num/den"` strings in every serialized form.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn is_probability(p: &Rational) -> bool {
    !p.is_negative() && *p <= Rational::one()
}

pub fn check_probability(p: &Rational) -> Result<()> {
    if is_probability(p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(format_rational(p)))
    }
}

/// Always `num/den`, including integers (`3/1`), so the format is uniform.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `num/den` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse {
        line: 0,
        col: 0,
        msg: format!("`{s}` is not a rational"),
    };
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn pow2(k: u32) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

pub mod serde_str {
    //! `#[serde(with = "...")]` adapter for a `Rational` stored as `"num/den"`.
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
