//! Exact rational scalars on which every measure value in the crate lives.
//!
//! `Scalar` is an arbitrary-precision rational kept in lowest terms with a
//! positive denominator (both invariants are maintained by `num::BigRational`
//! itself). Denominators grow like `3^n` for Chacon-style schemes, so
//! fixed-width arithmetic is never used.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::error::Error;

pub type Scalar = BigRational;

/// Builds `n / d` from machine integers. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Parses the wire form `"p/q"` (or a bare integer such as `"0"` / `"1"`).
pub fn parse(text: &str) -> Result<Scalar, Error> {
    let s = text.trim();
    let parsed: Scalar = s
        .parse()
        .map_err(|_| Error::Validation(format!("invalid rational {s:?}")))?;
    if let Some((_, d)) = s.split_once('/') {
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("invalid rational {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Validation(format!("zero denominator in {s:?}")));
        }
    }
    Ok(parsed)
}

/// Wire form: `"p/q"` in lowest terms, or a bare integer when `q == 1`.
pub fn format(x: &Scalar) -> String {
    x.to_string()
}

pub fn is_probability(x: &Scalar) -> bool {
    !x.is_negative() && *x <= Scalar::one()
}

/// Serde adapter so `Scalar` fields round-trip through the `"p/q"` string form.
pub mod serde_scalar {
    use super::Scalar;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Scalar, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&super::format(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Scalar, D::Error> {
        let s = String::deserialize(de)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "1", "2/3", "7/18", "1000000/1000001"] {
            let x = parse(s).unwrap();
            assert_eq!(format(&x), s);
        }
    }

    #[test]
    fn parse_reduces_to_lowest_terms() {
        assert_eq!(format(&parse("4/6").unwrap()), "2/3");
        assert_eq!(format(&parse("3/3").unwrap()), "1");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("1/0").is_err());
        assert!(parse("a/b").is_err());
        assert!(parse("1.5").is_err());
    }
}
