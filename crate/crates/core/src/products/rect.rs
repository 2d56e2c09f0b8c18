//! Finite unions of axis-aligned rectangles in `[0,1)^2`.
//!
//! A `RectSet` is a list of product pieces `X x Y` that are pairwise
//! disjoint as subsets of the square. The canonical form slices the square
//! into vertical columns at every X endpoint, stores one piece per column
//! with the full union of fibers above it, and merges neighboring columns
//! with identical fibers; two rect sets are equal as subsets of the square
//! iff their canonical forms are equal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectPiece {
    pub x: IntervalSet,
    pub y: IntervalSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RectSet {
    rects: Vec<RectPiece>,
}

impl RectSet {
    /// Builds from pieces, checking pairwise disjointness of the products.
    pub fn new(rects: Vec<RectPiece>) -> Result<Self> {
        let rects: Vec<RectPiece> = rects
            .into_iter()
            .filter(|r| !r.x.is_empty() && !r.y.is_empty())
            .collect();
        for i in 0..rects.len() {
            for j in i + 1..rects.len() {
                let xi = rects[i].x.intersect(&rects[j].x);
                if !xi.is_empty() && !rects[i].y.is_disjoint_from(&rects[j].y) {
                    return Err(Error::Validation(format!(
                        "rectangles {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(RectSet { rects })
    }

    pub fn empty() -> Self {
        RectSet { rects: Vec::new() }
    }

    pub fn full() -> Self {
        RectSet {
            rects: vec![RectPiece { x: IntervalSet::unit(), y: IntervalSet::unit() }],
        }
    }

    /// `E x [0,1)`.
    pub fn horizontal(e: &IntervalSet) -> Self {
        if e.is_empty() {
            return Self::empty();
        }
        RectSet {
            rects: vec![RectPiece { x: e.clone(), y: IntervalSet::unit() }],
        }
    }

    /// `[0,1) x F`.
    pub fn vertical(f: &IntervalSet) -> Self {
        if f.is_empty() {
            return Self::empty();
        }
        RectSet {
            rects: vec![RectPiece { x: IntervalSet::unit(), y: f.clone() }],
        }
    }

    pub fn product(x: IntervalSet, y: IntervalSet) -> Self {
        if x.is_empty() || y.is_empty() {
            return Self::empty();
        }
        RectSet { rects: vec![RectPiece { x, y }] }
    }

    pub fn pieces(&self) -> &[RectPiece] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.iter().all(|r| r.x.is_empty() || r.y.is_empty())
    }

    /// Product measure, exact (the pieces are disjoint).
    pub fn mass(&self) -> Scalar {
        self.rects
            .iter()
            .fold(scalar::zero(), |acc, r| acc + r.x.measure() * r.y.measure())
    }

    fn x_cuts(&self, other: Option<&RectSet>) -> Vec<Scalar> {
        let mut cuts = vec![scalar::zero(), scalar::one()];
        let mut push_all = |s: &RectSet| {
            for r in &s.rects {
                for (lo, hi) in r.x.pieces() {
                    cuts.push(lo.clone());
                    cuts.push(hi.clone());
                }
            }
        };
        push_all(self);
        if let Some(o) = other {
            push_all(o);
        }
        cuts.sort();
        cuts.dedup();
        cuts
    }

    /// Fiber above `x` for any point of a column that crosses no X endpoint.
    fn fiber_at(&self, x: &Scalar) -> IntervalSet {
        let mut f = IntervalSet::empty();
        for r in &self.rects {
            if r.x.contains_point(x) {
                f = f.union(&r.y);
            }
        }
        f
    }

    fn from_columns(columns: Vec<(Scalar, Scalar, IntervalSet)>) -> RectSet {
        let mut rects: Vec<RectPiece> = Vec::new();
        for (lo, hi, y) in columns {
            if y.is_empty() {
                continue;
            }
            match rects.last_mut() {
                Some(last)
                    if last.y == y
                        && last.x.pieces().last().map(|p| p.1 == lo) == Some(true) =>
                {
                    // extend the previous column instead of opening a new one
                    let mut ps = last.x.pieces().to_vec();
                    ps.last_mut().unwrap().1 = hi;
                    last.x = IntervalSet::from_pieces(ps).unwrap();
                }
                _ => {
                    rects.push(RectPiece {
                        x: IntervalSet::interval(lo, hi).unwrap(),
                        y,
                    });
                }
            }
        }
        // second pass: merge non-adjacent columns with equal fibers
        let mut merged: Vec<RectPiece> = Vec::new();
        for r in rects {
            if let Some(prev) = merged.iter_mut().find(|p| p.y == r.y) {
                prev.x = prev.x.union(&r.x);
            } else {
                merged.push(r);
            }
        }
        merged.sort_by(|a, b| a.x.pieces()[0].0.cmp(&b.x.pieces()[0].0));
        RectSet { rects: merged }
    }

    /// Canonical column form: X parts pairwise disjoint, fibers distinct.
    pub fn canonical(&self) -> RectSet {
        self.zip_with(&RectSet::empty(), |a, _| a.clone())
    }

    fn zip_with(
        &self,
        other: &RectSet,
        op: impl Fn(&IntervalSet, &IntervalSet) -> IntervalSet,
    ) -> RectSet {
        let cuts = self.x_cuts(Some(other));
        let mut columns = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            let y = op(&self.fiber_at(lo), &other.fiber_at(lo));
            columns.push((lo.clone(), hi.clone(), y));
        }
        RectSet::from_columns(columns)
    }

    pub fn union(&self, other: &RectSet) -> RectSet {
        self.zip_with(other, |a, b| a.union(b))
    }

    pub fn intersect(&self, other: &RectSet) -> RectSet {
        self.zip_with(other, |a, b| a.intersect(b))
    }

    pub fn difference(&self, other: &RectSet) -> RectSet {
        self.zip_with(other, |a, b| a.difference(b))
    }

    pub fn symdiff(&self, other: &RectSet) -> RectSet {
        self.zip_with(other, |a, b| a.symdiff(b))
    }

    /// `mu x mu` of the symmetric difference, exact.
    pub fn distance(&self, other: &RectSet) -> Scalar {
        self.symdiff(other).mass()
    }

    pub fn same_set(&self, other: &RectSet) -> bool {
        self.canonical() == other.canonical()
    }
}

/// Exact membership test for the residual classes indexed by `n`: is `A`
/// within `mu(E)/n` of a set containing the full horizontal slab over `E`?
#[derive(Debug, Clone, Serialize)]
pub struct ResidualWitness {
    pub member: bool,
    pub a_prime: RectSet,
    /// `mu(E)/n - mu x mu(A \triangle A')`; membership means this is positive.
    #[serde(with = "crate::scalar::serde_scalar")]
    pub deficit: Scalar,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub symdiff_mass: Scalar,
}

pub fn residual_witness(a: &RectSet, e: &IntervalSet, n: u64) -> Result<ResidualWitness> {
    if e.measure() <= scalar::zero() {
        return Err(Error::Validation("E must have positive measure".into()));
    }
    if n == 0 {
        return Err(Error::Validation("n must be >= 1".into()));
    }
    let a_prime = a.union(&RectSet::horizontal(e));
    let symdiff_mass = a.distance(&a_prime);
    let threshold = e.measure() / scalar::rat(n as i64, 1);
    Ok(ResidualWitness {
        member: symdiff_mass < threshold,
        a_prime,
        deficit: &threshold - &symdiff_mass,
        symdiff_mass,
    })
}

/// `{x in E : mu{y : (x,y) in A} > 1 - eps}`, exact. The fiber measure is
/// constant on each column of the grid refined by `E`'s endpoints.
pub fn fiber_heavy_base(a: &RectSet, e: &IntervalSet, eps: &Scalar) -> IntervalSet {
    let mut cuts = a.x_cuts(None);
    for (lo, hi) in e.pieces() {
        cuts.push(lo.clone());
        cuts.push(hi.clone());
    }
    cuts.sort();
    cuts.dedup();
    let bar = scalar::one() - eps;
    let mut out = IntervalSet::empty();
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        if e.contains_point(lo) && a.fiber_at(lo).measure() > bar {
            out = out.union(&IntervalSet::interval(lo.clone(), hi.clone()).unwrap());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn iv(a: i64, b: i64, den: i64) -> IntervalSet {
        IntervalSet::interval(rat(a, den), rat(b, den)).unwrap()
    }

    #[test]
    fn rejects_overlapping_products() {
        let r = vec![
            RectPiece { x: iv(0, 2, 4), y: iv(0, 2, 4) },
            RectPiece { x: iv(1, 3, 4), y: iv(1, 3, 4) },
        ];
        assert!(RectSet::new(r).is_err());
    }

    #[test]
    fn mass_of_an_l_shape() {
        let l = RectSet::new(vec![
            RectPiece { x: iv(0, 1, 2), y: IntervalSet::unit() },
            RectPiece { x: iv(1, 2, 2), y: iv(0, 1, 2) },
        ])
        .unwrap();
        assert_eq!(l.mass(), rat(3, 4));
        assert_eq!(l.canonical().mass(), rat(3, 4));
    }

    #[test]
    fn union_and_symdiff_are_exact() {
        let a = RectSet::product(iv(0, 1, 2), IntervalSet::unit());
        let b = RectSet::product(iv(1, 4, 4), iv(0, 1, 2));
        // overlap is [1/4,1/2) x [0,1/2), mass 1/8
        let u = a.union(&b);
        assert_eq!(u.mass(), rat(3, 4));
        let s = a.symdiff(&a);
        assert!(s.is_empty());
        assert_eq!(a.distance(&b), rat(5, 8));
    }

    #[test]
    fn canonical_forms_identify_equal_sets() {
        let a = RectSet::new(vec![
            RectPiece { x: iv(0, 1, 4), y: iv(0, 1, 2) },
            RectPiece { x: iv(1, 2, 4), y: iv(0, 1, 2) },
        ])
        .unwrap();
        let b = RectSet::product(iv(0, 2, 4), iv(0, 1, 2));
        assert!(a.same_set(&b));
        assert!(!a.same_set(&RectSet::full()));
    }

    #[test]
    fn residual_membership_arithmetic() {
        let e = iv(0, 1, 4);
        // A already contains the slab: deficit is the whole budget
        let slab = RectSet::horizontal(&e);
        let w = residual_witness(&slab, &e, 3).unwrap();
        assert!(w.member);
        assert_eq!(w.deficit, rat(1, 12));
        assert!(w.a_prime.same_set(&slab));

        // empty A at n=1: symdiff is exactly mu(E), strict inequality fails
        let w0 = residual_witness(&RectSet::empty(), &e, 1).unwrap();
        assert!(!w0.member);
        assert_eq!(w0.deficit, scalar::zero());

        // slab minus a thin strip of mass mu(E)/(2n)
        let n = 5u64;
        let strip = RectSet::product(e.clone(), iv(0, 1, 2 * n as i64));
        let thinned = slab.difference(&strip);
        let wt = residual_witness(&thinned, &e, n).unwrap();
        assert!(wt.member);
        assert_eq!(wt.symdiff_mass, rat(1, 4) / rat(2 * n as i64, 1));
    }

    #[test]
    fn fiber_heavy_base_examples() {
        let e = iv(0, 1, 3);
        assert_eq!(fiber_heavy_base(&RectSet::full(), &e, &rat(1, 10)), e);
        // fibers of mass 1/2 are excluded for eps < 1/2 and at eps = 1/2
        let half = RectSet::horizontal(&e).intersect(&RectSet::vertical(&iv(0, 1, 2)));
        assert!(fiber_heavy_base(&half, &e, &rat(1, 4)).is_empty());
        assert!(fiber_heavy_base(&half, &e, &rat(1, 2)).is_empty());
        assert_eq!(fiber_heavy_base(&half, &e, &rat(3, 4)), e);
        // always within E
        let f = fiber_heavy_base(&RectSet::full(), &iv(1, 2, 3), &rat(1, 10));
        assert!(f.is_subset_of(&iv(1, 2, 3)));
    }

    #[test]
    fn json_round_trip() {
        let a = RectSet::new(vec![
            RectPiece { x: iv(0, 1, 2), y: iv(1, 2, 3) },
        ])
        .unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"x\""));
        let back: RectSet = serde_json::from_str(&json).unwrap();
        assert_eq!(a, back);
    }
}
