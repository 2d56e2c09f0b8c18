//! Dense-family elements built from Rohlin towers, and the disjoint-union
//! correlation lower bound that makes them useful.

use rayon::prelude::*;

use super::exact_power;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

/// One element of the dense family: a height-`h` Rohlin tower `(B, E)`, the
/// leftmost slice `Abar` of `B` with `mu(Abar) = mu(B)/h`, the disjoint union
/// `A` of its `h` translates, and `D = B u E u A`.
#[derive(Debug, Clone)]
pub struct DenseFamilyElement {
    pub h: u128,
    pub b: IntervalSet,
    pub e: IntervalSet,
    pub abar: IntervalSet,
    pub a: IntervalSet,
    pub d: IntervalSet,
}

impl DenseFamilyElement {
    /// Exact structural checks: the translates are disjoint, `Abar` sits
    /// inside `B` with the right mass, and `D` is the stated union.
    pub fn verify(&self, engine: &Engine) -> Result<()> {
        if !self.abar.is_subset_of(&self.b) {
            return Err(Error::Precondition("Abar is not contained in B".into()));
        }
        let h = scalar::rat(self.h as i64, 1);
        if self.abar.measure() * &h != self.b.measure() {
            return Err(Error::Precondition("mu(Abar) != mu(B)/h".into()));
        }
        let mut union = IntervalSet::empty();
        let mut layer = self.abar.clone();
        for i in 0..self.h {
            if i > 0 {
                layer = exact_power(engine, &layer, 1)?;
            }
            if !layer.is_disjoint_from(&union) {
                return Err(Error::Precondition(format!(
                    "translate {i} of Abar overlaps earlier translates"
                )));
            }
            union = union.union(&layer);
        }
        if union != self.a {
            return Err(Error::Precondition("A != disjoint union of translates".into()));
        }
        if self.d != self.b.union(&self.e).union(&self.a) {
            return Err(Error::Precondition("D != B u E u A".into()));
        }
        Ok(())
    }
}

pub fn thm1_dense_family(engine: &Engine, h: u128) -> Result<DenseFamilyElement> {
    if h < 1 {
        return Err(Error::Validation("height must be >= 1".into()));
    }
    let delta = scalar::rat(1, h as i64);
    let (b, e, _) = engine.rohlin_tower(h, &delta)?;
    let slice_mass = b.measure() / scalar::rat(h as i64, 1);
    let abar = b.leftmost_slice(&slice_mass)?;
    let mut a = IntervalSet::empty();
    let mut layer = abar.clone();
    for i in 0..h {
        if i > 0 {
            layer = exact_power(engine, &layer, 1)?;
        }
        a = a.union(&layer);
    }
    let d = b.union(&e).union(&a);
    let elem = DenseFamilyElement { h, b, e, abar, a, d };
    elem.verify(engine)?;
    Ok(elem)
}

/// Outcome of checking the correlation lower bound `mu(T^n A n B) >= mu(Abar)`
/// for a disjoint-union set `A` over a range of shifts.
#[derive(Debug, Clone)]
pub struct Lemma1Report {
    /// Mass possibly missed by the union of preimages of `B` (must be
    /// `<= eps` for the hypothesis to count as verified).
    pub uncovered_mass: Scalar,
    /// `(n, lo - mu(Abar), hi - mu(Abar))` per shift, sorted by `n`.
    pub margins: Vec<(i64, Scalar, Scalar)>,
    /// Shifts whose upper margin is negative. Any entry refutes the bound.
    pub refuted: Vec<i64>,
}

impl Lemma1Report {
    pub fn min_lower_margin(&self) -> Option<&Scalar> {
        self.margins.iter().map(|(_, lo, _)| lo).min()
    }
}

/// Verifies the hypotheses exactly, then computes certified margins
/// `correlation(A, B, n) - mu(Abar)` for every `n` in the range. The bound
/// holds for every integer shift, so negative `n` are accepted.
pub fn lemma1_check(
    engine: &Engine,
    abar: &IntervalSet,
    h: u128,
    b: &IntervalSet,
    n_range: std::ops::RangeInclusive<i64>,
    eps: &Scalar,
) -> Result<Lemma1Report> {
    if h < 1 {
        return Err(Error::Validation("height must be >= 1".into()));
    }
    if *eps <= scalar::zero() {
        return Err(Error::Validation("epsilon must be positive".into()));
    }

    // hypothesis 1: the h translates of Abar are pairwise disjoint
    let mut a = IntervalSet::empty();
    let mut layer = abar.clone();
    for i in 0..h {
        if i > 0 {
            layer = exact_power(engine, &layer, 1)?;
        }
        if !layer.is_disjoint_from(&a) {
            return Err(Error::Precondition(format!(
                "hypothesis failed: translate {i} of Abar overlaps earlier translates"
            )));
        }
        a = a.union(&layer);
    }

    // hypothesis 2: the preimages T^{-i}B, i < h, cover the space up to eps
    let per_image = eps / scalar::rat(h as i64, 1);
    let mut covered = IntervalSet::empty();
    for i in 0..h {
        let pre = engine.forward_image(b, -(i as i64), &per_image)?;
        covered = covered.union(&pre.resolved);
    }
    let uncovered_mass = covered.complement().measure();
    if uncovered_mass > *eps {
        return Err(Error::Precondition(format!(
            "hypothesis failed: preimages of B leave mass {} uncovered",
            scalar::format(&uncovered_mass)
        )));
    }

    let mu_abar = abar.measure();
    let shifts: Vec<i64> = n_range.collect();
    let mut margins: Vec<(i64, Scalar, Scalar)> = shifts
        .par_iter()
        .map(|&n| {
            // exact values where the scheme allows them: the bound can be
            // tight, and an enclosure's lower end always sits strictly below
            match engine.correlation_exact(&a, b, n) {
                Ok(v) => Ok((n, &v - &mu_abar, v - &mu_abar)),
                Err(Error::Precondition(_)) => {
                    let c = engine.correlation(&a, b, n, eps)?;
                    Ok((n, c.lo - &mu_abar, c.hi - &mu_abar))
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    margins.sort_by_key(|(n, _, _)| *n);
    let refuted = margins
        .iter()
        .filter(|(_, _, hi)| *hi < scalar::zero())
        .map(|(n, _, _)| *n)
        .collect();
    Ok(Lemma1Report { uncovered_mass, margins, refuted })
}
