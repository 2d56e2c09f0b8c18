//! First-return decompositions and the disjoint pair `(C_h, D_h)` built from
//! a height-`(h+1)` Rohlin tower.

use super::exact_power;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

/// Partition of a set by first-return time to a target set, up to a small
/// unresolved remainder.
#[derive(Debug, Clone)]
pub struct ReturnDecomposition {
    /// `(piece, i)`: the piece returns to the target first at time `i`.
    pub pieces: Vec<(IntervalSet, u32)>,
    pub unresolved: IntervalSet,
}

impl ReturnDecomposition {
    pub fn resolved_mass(&self) -> Scalar {
        self.pieces
            .iter()
            .fold(scalar::zero(), |acc, (p, _)| acc + p.measure())
    }
}

/// Splits `E` into pieces of constant first-return time to `B`, following
/// forward images step by step and peeling off whatever lands in `B`.
/// Stops once the remainder has mass `<= eps`; reports a resource error if
/// `cap` steps do not get there.
pub fn first_return_decomposition(
    engine: &Engine,
    e: &IntervalSet,
    b: &IntervalSet,
    cap: u32,
    eps: &Scalar,
) -> Result<ReturnDecomposition> {
    if b.measure() <= scalar::zero() {
        return Err(Error::Validation("target set must have positive measure".into()));
    }
    if *eps <= scalar::zero() {
        return Err(Error::Validation("epsilon must be positive".into()));
    }
    let mut pieces: Vec<(IntervalSet, u32)> = Vec::new();
    let mut remaining = e.clone();
    let inside = remaining.intersect(b);
    if !inside.is_empty() {
        remaining = remaining.difference(&inside);
        pieces.push((inside, 0));
    }
    let step_eps = eps / scalar::rat(2, 1) / scalar::rat(cap.max(1) as i64, 1);
    for i in 1..=cap {
        if remaining.measure() <= *eps {
            break;
        }
        let img = engine.forward_image(&remaining, i as i64, &step_eps)?;
        let hits = img.resolved.intersect(b);
        if hits.is_empty() {
            continue;
        }
        let src = engine.forward_image(&hits, -(i as i64), &step_eps)?;
        let piece = src.resolved.intersect(&remaining);
        if piece.is_empty() {
            continue;
        }
        remaining = remaining.difference(&piece);
        pieces.push((piece, i));
    }
    if remaining.measure() > *eps {
        return Err(Error::Resource {
            msg: format!("first-return mass above tolerance after {cap} steps"),
            achieved: Some(remaining.measure()),
        });
    }
    Ok(ReturnDecomposition { pieces, unresolved: remaining })
}

/// A disjoint pair carved out of a height-`(h+1)` Rohlin tower, plus the
/// mass the construction could not resolve.
#[derive(Debug, Clone)]
pub struct Thm4Pair {
    pub h: u128,
    pub c: IntervalSet,
    pub d: IntervalSet,
    pub unresolved: Scalar,
}

impl Thm4Pair {
    /// Exact checks: disjointness and the `2/(h+1)` measure bounds.
    pub fn verify(&self) -> Result<()> {
        if !self.c.is_disjoint_from(&self.d) {
            return Err(Error::Precondition("C and D overlap".into()));
        }
        let bound = scalar::rat(2, 1) / scalar::rat(self.h as i64 + 1, 1);
        if self.c.measure() >= bound {
            return Err(Error::Precondition("mu(C) >= 2/(h+1)".into()));
        }
        if self.d.measure() >= bound {
            return Err(Error::Precondition("mu(D) >= 2/(h+1)".into()));
        }
        Ok(())
    }
}

/// Builds the pair from a height-`(h+1)` tower whose error set satisfies
/// `mu(E) < mu(B) / (4(h+1))`. When `E` has positive mass, `C` collects the
/// forward orbit of `E` until each point has returned to `B` and climbed `h`
/// more levels; when `E` is null, `C` is a stack of `h+1` translates of a
/// thin left slice of `B`. `D` is what remains of the bottom and top tower
/// levels.
pub fn thm4_mm_pair(engine: &Engine, h: u128, eps: &Scalar) -> Result<Thm4Pair> {
    if h < 1 {
        return Err(Error::Validation("height must be >= 1".into()));
    }
    let hp1 = h + 1;
    let hp1_s = scalar::rat(hp1 as i64, 1);
    // pick the tower so that mu(E) < mu(B)/(4(h+1)) can be verified exactly
    let mut delta = scalar::rat(1, 1) / (scalar::rat(5, 1) * &hp1_s * &hp1_s);
    let (b, e) = loop {
        let (b, e, _) = engine.rohlin_tower(hp1, &delta)?;
        if e.measure() * scalar::rat(4, 1) * &hp1_s < b.measure() {
            break (b, e);
        }
        delta = delta / scalar::rat(2, 1);
    };

    let mut unresolved = scalar::zero();
    let c = if e.measure() > scalar::zero() {
        let cap = 4 * hp1 as u32 * engine.stage_cap();
        let half_eps = eps / scalar::rat(2, 1);
        let dec = first_return_decomposition(engine, &e, &b, cap, &half_eps)?;
        unresolved += dec.unresolved.measure();
        // orbit tubes cross tower tops, so each step may shed a sliver that
        // only deeper stages could place; those are tallied, not chased
        let mut steps_total: u128 = 0;
        for (_, ret) in &dec.pieces {
            steps_total += *ret as u128 + h;
        }
        let step_eps = half_eps / scalar::rat(steps_total.max(1) as i64, 1);
        let mut c = dec.unresolved.clone();
        for (piece, ret) in &dec.pieces {
            let mut layer = piece.clone();
            c = c.union(&layer);
            for _ in 0..(*ret as u128 + h) {
                let img = engine.forward_image(&layer, 1, &step_eps)?;
                unresolved += &img.unresolved_mass;
                layer = img.resolved;
                c = c.union(&layer);
            }
        }
        c
    } else {
        let slice_mass = b.measure() / (scalar::rat(8, 1) * &hp1_s);
        let mut c = IntervalSet::empty();
        let mut layer = b.leftmost_slice(&slice_mass)?;
        for i in 0..hp1 {
            if i > 0 {
                layer = exact_power(engine, &layer, 1)?;
            }
            c = c.union(&layer);
        }
        c
    };

    let top = exact_power(engine, &b, h as i64)?;
    let d = b.difference(&c).union(&top.difference(&c));
    let pair = Thm4Pair { h, c, d, unresolved };
    pair.verify()?;
    Ok(pair)
}
