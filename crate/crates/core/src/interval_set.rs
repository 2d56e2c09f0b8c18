//! Canonical finite unions of half-open rational subintervals of `[0,1)`.
//!
//! Every measurable set the crate manipulates is an `IntervalSet`. The
//! representation is canonical: intervals are pairwise disjoint, sorted by
//! left endpoint, and non-adjacent (touching intervals are merged), so
//! structural equality coincides with measure-theoretic equality.

use std::fmt;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    intervals: Vec<(Scalar, Scalar)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    /// The full space `[0,1)`.
    pub fn unit() -> Self {
        IntervalSet {
            intervals: vec![(scalar::zero(), scalar::one())],
        }
    }

    /// Single interval `[a,b)`; empty if `a >= b` after clamping to `[0,1]`.
    pub fn interval(a: Scalar, b: Scalar) -> Result<Self, Error> {
        if a < scalar::zero() || b > scalar::one() {
            return Err(Error::Validation(format!(
                "interval [{},{}) not contained in [0,1)",
                scalar::format(&a),
                scalar::format(&b)
            )));
        }
        if a >= b {
            return Ok(Self::empty());
        }
        Ok(IntervalSet { intervals: vec![(a, b)] })
    }

    /// Canonicalizes an arbitrary list of `[a,b)` pairs (union semantics).
    pub fn from_pieces(pieces: Vec<(Scalar, Scalar)>) -> Result<Self, Error> {
        for (a, b) in &pieces {
            if *a < scalar::zero() || *b > scalar::one() {
                return Err(Error::Validation(format!(
                    "interval [{},{}) not contained in [0,1)",
                    scalar::format(a),
                    scalar::format(b)
                )));
            }
        }
        Ok(Self::canonicalize(pieces))
    }

    /// Sorts, drops empty pieces and merges overlapping/touching ones.
    pub(crate) fn canonicalize(mut pieces: Vec<(Scalar, Scalar)>) -> Self {
        pieces.retain(|(a, b)| a < b);
        pieces.sort();
        let mut out: Vec<(Scalar, Scalar)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match out.last_mut() {
                Some((_, pb)) if *pb >= a => {
                    if b > *pb {
                        *pb = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn pieces(&self) -> &[(Scalar, Scalar)] {
        &self.intervals
    }

    pub fn measure(&self) -> Scalar {
        self.intervals
            .iter()
            .fold(scalar::zero(), |acc, (a, b)| acc + (b - a))
    }

    pub fn contains_point(&self, x: &Scalar) -> bool {
        // first interval with right endpoint > x
        let i = self.intervals.partition_point(|(_, b)| b <= x);
        self.intervals.get(i).map_or(false, |(a, _)| a <= x)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut pieces = self.intervals.clone();
        pieces.extend(other.intervals.iter().cloned());
        Self::canonicalize(pieces)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a1, b1) = &self.intervals[i];
            let (a2, b2) = &other.intervals[j];
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if b1 < b2 { b1 } else { b2 };
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        // pieces are already disjoint and sorted
        IntervalSet { intervals: out }
    }

    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::new();
        let mut cursor = scalar::zero();
        for (a, b) in &self.intervals {
            if cursor < *a {
                out.push((cursor, a.clone()));
            }
            cursor = b.clone();
        }
        if cursor < scalar::one() {
            out.push((cursor, scalar::one()));
        }
        IntervalSet { intervals: out }
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        self.intersect(&other.complement())
    }

    pub fn symdiff(&self, other: &IntervalSet) -> IntervalSet {
        self.difference(other).union(&other.difference(self))
    }

    /// The metric `d(A,B) = mu(A symdiff B)` on the measure algebra.
    pub fn distance(&self, other: &IntervalSet) -> Scalar {
        self.symdiff(other).measure()
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint_from(&self, other: &IntervalSet) -> bool {
        self.intersect(other).is_empty()
    }

    /// Measure of the overlap with a single interval `[lo,hi)`, by binary search.
    pub fn overlap_measure(&self, lo: &Scalar, hi: &Scalar) -> Scalar {
        let mut total = scalar::zero();
        let start = self.intervals.partition_point(|(_, b)| b <= lo);
        for (a, b) in &self.intervals[start..] {
            if a >= hi {
                break;
            }
            let l = if a > lo { a } else { lo };
            let r = if b < hi { b } else { hi };
            if l < r {
                total += r - l;
            }
        }
        total
    }

    /// Leftmost subset of this set with measure exactly `mass`.
    /// Errors if `mass` exceeds the measure of the set or is negative.
    pub fn leftmost_slice(&self, mass: &Scalar) -> Result<IntervalSet, Error> {
        if *mass < scalar::zero() {
            return Err(Error::Validation("negative slice mass".into()));
        }
        let mut out = Vec::new();
        let mut need = mass.clone();
        for (a, b) in &self.intervals {
            if need == scalar::zero() {
                break;
            }
            let len = b - a;
            if len <= need {
                out.push((a.clone(), b.clone()));
                need -= len;
            } else {
                out.push((a.clone(), a + &need));
                need = scalar::zero();
            }
        }
        if need > scalar::zero() {
            return Err(Error::Validation(format!(
                "slice mass {} exceeds set measure {}",
                scalar::format(mass),
                scalar::format(&self.measure())
            )));
        }
        Ok(IntervalSet { intervals: out })
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, (a, b)) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            write!(f, "[{},{})", scalar::format(a), scalar::format(b))?;
        }
        Ok(())
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.intervals.len()))?;
        for (a, b) in &self.intervals {
            seq.serialize_element(&[scalar::format(a), scalar::format(b)])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = IntervalSet;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a list of [\"a/b\",\"c/d\"] pairs")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<IntervalSet, A::Error> {
                let mut pieces = Vec::new();
                while let Some([a, b]) = seq.next_element::<[String; 2]>()? {
                    let a = scalar::parse(&a).map_err(serde::de::Error::custom)?;
                    let b = scalar::parse(&b).map_err(serde::de::Error::custom)?;
                    pieces.push((a, b));
                }
                IntervalSet::from_pieces(pieces).map_err(serde::de::Error::custom)
            }
        }
        de.deserialize_seq(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn iv(a: (i64, i64), b: (i64, i64)) -> IntervalSet {
        IntervalSet::interval(rat(a.0, a.1), rat(b.0, b.1)).unwrap()
    }

    #[test]
    fn intersect_of_overlapping_intervals() {
        let a = iv((0, 1), (1, 2));
        let b = iv((1, 4), (3, 4));
        assert_eq!(a.intersect(&b), iv((1, 4), (1, 2)));
    }

    #[test]
    fn complement_of_empty_is_unit() {
        assert_eq!(IntervalSet::empty().complement(), IntervalSet::unit());
    }

    #[test]
    fn symdiff_leaves_disjoint_remainders() {
        let a = iv((0, 1), (1, 2));
        let b = iv((1, 4), (3, 4));
        let expected = iv((0, 1), (1, 4)).union(&iv((1, 2), (3, 4)));
        assert_eq!(a.symdiff(&b), expected);
    }

    #[test]
    fn measure_sums_lengths() {
        let s = iv((0, 1), (2, 9)).union(&iv((1, 3), (1, 2)));
        assert_eq!(s.measure(), rat(7, 18));
        assert_eq!(IntervalSet::empty().measure(), rat(0, 1));
        assert_eq!(IntervalSet::unit().measure(), rat(1, 1));
    }

    #[test]
    fn distance_examples() {
        let a = iv((0, 1), (1, 2));
        let b = iv((1, 4), (3, 4));
        assert_eq!(a.distance(&b), rat(1, 2));
        assert_eq!(a.distance(&a), rat(0, 1));
        assert_eq!(IntervalSet::empty().distance(&IntervalSet::unit()), rat(1, 1));
    }

    #[test]
    fn canonical_merges_touching() {
        let s = iv((0, 1), (1, 2)).union(&iv((1, 2), (1, 1)));
        assert_eq!(s, IntervalSet::unit());
    }

    #[test]
    fn leftmost_slice_splits_exactly() {
        let s = iv((0, 1), (2, 9)).union(&iv((1, 3), (1, 2)));
        let half = s.leftmost_slice(&rat(7, 36)).unwrap();
        assert_eq!(half.measure(), rat(7, 36));
        assert!(half.is_subset_of(&s));
        assert!(s.leftmost_slice(&rat(1, 2)).is_err());
    }

    #[test]
    fn overlap_measure_matches_intersection() {
        let s = iv((0, 1), (2, 9)).union(&iv((1, 3), (1, 2)));
        let lo = rat(1, 9);
        let hi = rat(5, 12);
        let direct = s
            .intersect(&IntervalSet::interval(lo.clone(), hi.clone()).unwrap())
            .measure();
        assert_eq!(s.overlap_measure(&lo, &hi), direct);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let s = iv((0, 1), (2, 9)).union(&iv((1, 3), (1, 2)));
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"[["0","2/9"],["1/3","1/2"]]"#);
        let back: IntervalSet = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_string(&back).unwrap(), j);
    }
}
