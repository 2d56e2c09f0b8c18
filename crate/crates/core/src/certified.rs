//! Certified rational enclosures for quantities that finite-stage
//! computation cannot pin down exactly, such as `mu(T^k A \cap B)`.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::{self, serde_scalar, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedValue {
    #[serde(with = "serde_scalar")]
    pub lo: Scalar,
    #[serde(with = "serde_scalar")]
    pub hi: Scalar,
}

impl CertifiedValue {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self, Error> {
        if lo > hi || !scalar::is_probability(&lo) || !scalar::is_probability(&hi) {
            return Err(Error::Validation(format!(
                "invalid enclosure [{},{}]",
                scalar::format(&lo),
                scalar::format(&hi)
            )));
        }
        Ok(CertifiedValue { lo, hi })
    }

    pub fn exact(v: Scalar) -> Self {
        CertifiedValue { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &Scalar) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    pub fn intersects(&self, other: &CertifiedValue) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Interval product, valid since all enclosed quantities live in `[0,1]`.
    pub fn mul(&self, other: &CertifiedValue) -> CertifiedValue {
        CertifiedValue {
            lo: &self.lo * &other.lo,
            hi: &self.hi * &other.hi,
        }
    }

    /// Interval sum clamped to `[0,1]`.
    pub fn add(&self, other: &CertifiedValue) -> CertifiedValue {
        let hi = &self.hi + &other.hi;
        CertifiedValue {
            lo: &self.lo + &other.lo,
            hi: if hi > scalar::one() { scalar::one() } else { hi },
        }
    }

    /// Largest possible distance between the true values of two enclosures.
    pub fn gap_upper_bound(&self, other: &CertifiedValue) -> Scalar {
        let a = &self.hi - &other.lo;
        let b = &other.hi - &self.lo;
        let m = if a > b { a } else { b };
        if m < scalar::zero() {
            scalar::zero()
        } else {
            m
        }
    }
}

impl std::fmt::Display for CertifiedValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{}]", scalar::format(&self.lo), scalar::format(&self.hi))
    }
}
