//! Set images under `T^k` by stage refinement.
//!
//! The input set is decomposed into fragments, each tagged with the stage
//! level that contains it. Within a stage, `T^k` translates level `i` onto
//! level `i+k` whenever `i+k` is still inside the tower, so such fragments
//! resolve exactly at the earliest stage where their index allows it.
//! Fragments whose orbit crosses a top level (or that sit in the pool) are
//! refined to the next stage; the loop stops once the unresolved mass is
//! within the requested budget. Negative `k` is the mirrored walk: level
//! `i` maps onto `i+k` for `i >= -k`, refining at the bottom and pool.

use std::sync::Arc;

use num::bigint::BigInt;

use super::{
    div_ceil, div_floor, level_left_in, spacer_level_index, Engine, StageInfo,
};
use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

/// Image of a set under `T^k`, resolved up to a certified unresolved mass.
#[derive(Debug, Clone)]
pub struct PartialImage {
    pub resolved: IntervalSet,
    pub unresolved_mass: Scalar,
    /// The part of the input whose image is not yet determined.
    pub source_unresolved: IntervalSet,
}

#[derive(Clone)]
pub(super) enum Loc {
    Level { idx: u128, left: Scalar },
    Pool,
}

#[derive(Clone)]
pub(super) struct Frag {
    pub lo: Scalar,
    pub hi: Scalar,
    pub loc: Loc,
}

impl Frag {
    pub fn mass(&self) -> Scalar {
        &self.hi - &self.lo
    }
}

/// Stage-1 decomposition of a set: the single level `[0,w1)` and the pool.
pub(super) fn initial_frags(a: &IntervalSet, w1: &Scalar) -> Vec<Frag> {
    let mut frags = Vec::new();
    for (lo, hi) in a.pieces() {
        if lo < w1 {
            frags.push(Frag {
                lo: lo.clone(),
                hi: if hi < w1 { hi.clone() } else { w1.clone() },
                loc: Loc::Level { idx: 0, left: scalar::zero() },
            });
        }
        if hi > w1 {
            frags.push(Frag {
                lo: if lo > w1 { lo.clone() } else { w1.clone() },
                hi: hi.clone(),
                loc: Loc::Pool,
            });
        }
    }
    frags
}

pub(super) fn forward_image(
    engine: &Engine,
    a: &IntervalSet,
    k: i64,
    eps: &Scalar,
) -> Result<PartialImage> {
    let mut pieces: Vec<(Scalar, Scalar)> = Vec::new();
    let (unresolved_mass, source_unresolved) =
        scan(engine, a, k, eps, |lo, hi| pieces.push((lo, hi)))?;
    Ok(PartialImage {
        resolved: IntervalSet::canonicalize(pieces),
        unresolved_mass,
        source_unresolved,
    })
}

pub(super) fn correlation(
    engine: &Engine,
    a: &IntervalSet,
    b: &IntervalSet,
    k: i64,
    eps: &Scalar,
) -> Result<CertifiedValue> {
    let mut lo = scalar::zero();
    let (unresolved_mass, _) = scan(engine, a, k, eps, |piece_lo, piece_hi| {
        lo += b.overlap_measure(&piece_lo, &piece_hi);
    })?;
    let hi = &lo + &unresolved_mass;
    CertifiedValue::new(lo, hi)
}

/// Core refinement loop. Emits every resolved image piece through `emit`
/// (pieces are pairwise disjoint but arrive unordered) and returns the exact
/// unresolved mass together with the unresolved part of the source set.
fn scan(
    engine: &Engine,
    a: &IntervalSet,
    k: i64,
    eps: &Scalar,
    mut emit: impl FnMut(Scalar, Scalar),
) -> Result<(Scalar, IntervalSet)> {
    if *eps <= scalar::zero() {
        return Err(Error::Validation("epsilon must be positive".into()));
    }
    if a.is_empty() {
        return Ok((scalar::zero(), IntervalSet::empty()));
    }
    if k == 0 {
        for (lo, hi) in a.pieces() {
            emit(lo.clone(), hi.clone());
        }
        return Ok((scalar::zero(), IntervalSet::empty()));
    }

    let cap = engine.stage_cap();
    let mut stages = engine.stages_up_to(1)?;
    let mut frags = initial_frags(a, &stages[0].w);

    let mut n: u32 = 1;
    loop {
        let info = stages[n as usize - 1].clone();
        let mut kept: Vec<Frag> = Vec::new();
        let mut kept_mass = scalar::zero();
        for frag in frags {
            match &frag.loc {
                Loc::Level { idx, left } => {
                    let target = target_index(*idx, k, info.h);
                    match target {
                        Some(t) => {
                            let target_left = level_left_in(&stages, n, t);
                            let lo = &frag.lo - left + &target_left;
                            let hi = &frag.hi - left + &target_left;
                            emit(lo, hi);
                        }
                        None => {
                            kept_mass += frag.mass();
                            kept.push(frag);
                        }
                    }
                }
                Loc::Pool => {
                    kept_mass += frag.mass();
                    kept.push(frag);
                }
            }
        }

        if kept_mass <= *eps {
            let src = IntervalSet::canonicalize(
                kept.into_iter().map(|f| (f.lo, f.hi)).collect(),
            );
            return Ok((kept_mass, src));
        }
        if n == cap {
            return Err(Error::Resource {
                msg: format!(
                    "unresolved mass above {} after stage {cap}",
                    scalar::format(eps)
                ),
                achieved: Some(kept_mass),
            });
        }

        n += 1;
        stages = engine.stages_up_to(n)?;
        frags = refine(&stages[n as usize - 1], kept);
    }
}

/// `idx + k` when that stays inside the tower of height `h`.
pub(super) fn target_index(idx: u128, k: i64, h: u128) -> Option<u128> {
    if k >= 0 {
        let t = idx.checked_add(k as u128)?;
        (t < h).then_some(t)
    } else {
        idx.checked_sub(k.unsigned_abs() as u128)
    }
}

/// Splits stage-`n` fragments along the sublevel and spacer boundaries of
/// stage `n+1` (`next` is the stage-(n+1) record).
pub(super) fn refine(next: &Arc<StageInfo>, frags: Vec<Frag>) -> Vec<Frag> {
    let sub = next.sub.as_ref().expect("refinement target has structure");
    let w = &next.w;
    let mut out = Vec::with_capacity(frags.len() * 2);
    for frag in frags {
        match frag.loc {
            Loc::Level { idx, left } => {
                let j_lo = div_floor(&(&frag.lo - &left), w).max(0) as u128;
                let j_hi = (div_ceil(&(&frag.hi - &left), w) - 1) as u128;
                for j in j_lo..=j_hi {
                    let cell_lo = &left + w * BigInt::from(j);
                    let cell_hi = &cell_lo + w;
                    let lo = if frag.lo > cell_lo { frag.lo.clone() } else { cell_lo.clone() };
                    let hi = if frag.hi < cell_hi { frag.hi.clone() } else { cell_hi };
                    debug_assert!(lo < hi);
                    out.push(Frag {
                        lo,
                        hi,
                        loc: Loc::Level {
                            idx: sub.block_prefix[j as usize] + idx,
                            left: cell_lo,
                        },
                    });
                }
            }
            Loc::Pool => {
                let spacer_base = &sub.prev_pool_start;
                let spacer_end = &next.pool_start;
                // Spacer cells occupy [spacer_base, spacer_end) in allocation
                // order; the remainder of the old pool stays pool.
                if frag.lo < *spacer_end {
                    let clip_hi = if frag.hi < *spacer_end {
                        frag.hi.clone()
                    } else {
                        spacer_end.clone()
                    };
                    let q_lo = div_floor(&(&frag.lo - spacer_base), w).max(0) as u64;
                    let q_hi = (div_ceil(&(&clip_hi - spacer_base), w) - 1) as u64;
                    for q in q_lo..=q_hi {
                        let cell_lo = spacer_base + w * BigInt::from(q);
                        let cell_hi = &cell_lo + w;
                        let lo = if frag.lo > cell_lo { frag.lo.clone() } else { cell_lo.clone() };
                        let hi = if clip_hi < cell_hi { clip_hi.clone() } else { cell_hi };
                        debug_assert!(lo < hi);
                        out.push(Frag {
                            lo,
                            hi,
                            loc: Loc::Level {
                                idx: spacer_level_index(sub, q),
                                left: cell_lo,
                            },
                        });
                    }
                }
                if frag.hi > *spacer_end {
                    out.push(Frag {
                        lo: if frag.lo > *spacer_end {
                            frag.lo.clone()
                        } else {
                            spacer_end.clone()
                        },
                        hi: frag.hi,
                        loc: Loc::Pool,
                    });
                }
            }
        }
    }
    out
}
