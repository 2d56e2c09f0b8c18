//! Exact correlations for schemes with a constant tail rule.
//!
//! The fragment scan normally stops at a finite stage and reports the still
//! unresolved mass as an enclosure width. Under a constant tail rule the
//! fragments that persist forever are completely structured: a level
//! fragment survives only by riding the last subcolumn at a fixed distance
//! `d` below the top (possible only when the rule puts no spacers above the
//! last subcolumn), and a pool fragment survives as the exact pool interval.
//! In both cases each further stage resolves a fixed fraction of the
//! fragment onto landing sites whose membership in the target set
//! stabilizes, so the infinite tail sums to an exact rational geometric
//! series. Everything else dies out in finitely many stages: a partial-cell
//! rider loses a constant factor of its cell overhang per stage, and rules
//! with trailing spacers push riders away from the top until they resolve.

use std::collections::HashMap;

use super::image::{initial_frags, refine, target_index, Frag, Loc};
use super::Engine;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

/// `mu(T^k A n B)` as an exact rational. Fails with a precondition error
/// when the scheme leaves persistent fragments this analysis cannot
/// collapse (pool fragments under a rule with trailing spacers).
pub(super) fn correlation_exact(
    engine: &Engine,
    a: &IntervalSet,
    b: &IntervalSet,
    k: i64,
) -> Result<Scalar> {
    if k == 0 {
        return Ok(a.intersect(b).measure());
    }
    if k < 0 {
        // mu(T^k A n B) = mu(A n T^{-k} B), so swap the roles
        return correlation_exact(engine, b, a, -k);
    }
    let cap = engine.stage_cap();
    let tail_from = engine.spec().prefix.len() as u32 + 1;
    let rule = &engine.spec().tail;
    let r = rule.cuts as usize;
    let s_last = *rule.spacers.last().unwrap();

    let mut memberships = Memberships::default();
    let mut stages = engine.stages_up_to(1)?;
    let mut frags = initial_frags(a, &stages[0].w);
    let mut total = scalar::zero();
    let mut n: u32 = 1;
    loop {
        let info = stages[n as usize - 1].clone();
        let mut kept: Vec<Frag> = Vec::new();
        for frag in frags {
            match &frag.loc {
                Loc::Level { idx, left } => match target_index(*idx, k, info.h) {
                    Some(t) => {
                        let target_left = super::level_left_in(&stages, n, t);
                        let lo = &frag.lo - left + &target_left;
                        let hi = &frag.hi - left + target_left;
                        total += b.overlap_measure(&lo, &hi);
                    }
                    None => kept.push(frag),
                },
                Loc::Pool => kept.push(frag),
            }
        }

        // collapse persistent chains once the constant rule governs every
        // later stage and the landing memberships are stable from here on
        if n >= tail_from && info.h > k as u128 {
            let mut remaining = Vec::new();
            for frag in kept {
                match try_collapse(engine, b, &frag, &info, rule, r, s_last, k, n, &mut memberships)? {
                    Some(tail) => total += tail,
                    None => remaining.push(frag),
                }
            }
            kept = remaining;
        }

        if kept.is_empty() {
            return Ok(total);
        }
        if n == cap {
            let mass = kept.iter().fold(scalar::zero(), |acc, f| acc + f.mass());
            return Err(Error::Resource {
                msg: format!("exact correlation still has live fragments at stage {cap}"),
                achieved: Some(mass),
            });
        }
        n += 1;
        stages = engine.stages_up_to(n)?;
        frags = refine(&stages[n as usize - 1], kept);
    }
}

/// Landing site of a resolved tail piece: either a fixed low level of the
/// previous stage, or the spacer region carved from the pool.
enum Landing {
    Level(u128),
    PoolRegion,
}

fn try_collapse(
    engine: &Engine,
    b: &IntervalSet,
    frag: &Frag,
    info: &super::StageInfo,
    rule: &crate::scheme::StageRule,
    r: usize,
    s_last: u64,
    k: i64,
    n: u32,
    memberships: &mut Memberships,
) -> Result<Option<Scalar>> {
    let k = k as u128;
    match &frag.loc {
        Loc::Level { idx, left } => {
            if s_last != 0 {
                // riders drift away from the top and die on their own
                return Ok(None);
            }
            let full_cell = frag.lo == *left && frag.hi == left + &info.w;
            if !full_cell {
                return Ok(None);
            }
            let d = info.h - 1 - idx;
            debug_assert!(d < k);
            // children in all but the last subcolumn resolve each stage
            let mut hits = 0u32;
            for j in 0..r - 1 {
                let s_j = rule.spacers[j] as u128;
                let e = k - d - 1;
                let landing = if e < s_j {
                    Landing::PoolRegion
                } else {
                    Landing::Level(e - s_j)
                };
                match memberships.lookup(engine, b, &landing, n)? {
                    Some(true) => hits += 1,
                    Some(false) => {}
                    None => return Ok(None), // not stable yet, refine more
                }
            }
            let tail = frag.mass() * scalar::rat(hits as i64, r as i64 - 1);
            Ok(Some(tail))
        }
        Loc::Pool => {
            if s_last != 0 {
                return Err(Error::Precondition(
                    "pool fragment persists under a rule with trailing spacers".into(),
                ));
            }
            if frag.lo != info.pool_start || frag.hi != scalar::one() {
                return Ok(None);
            }
            // every stage converts the spacer cells of the rule into level
            // mass; spacer q sits above subcolumn j with r_above further
            // spacers before the next subcolumn bottom
            let mut hits = 0u32;
            let mut count = 0u32;
            for (j, &s_j) in rule.spacers.iter().enumerate() {
                for q in 0..s_j as u128 {
                    count += 1;
                    let r_above = s_j as u128 - q - 1;
                    let landing = if k <= r_above {
                        Landing::PoolRegion
                    } else {
                        debug_assert!(j + 1 < r);
                        Landing::Level(k - r_above - 1)
                    };
                    match memberships.lookup(engine, b, &landing, n)? {
                        Some(true) => hits += 1,
                        Some(false) => {}
                        None => return Ok(None),
                    }
                }
            }
            if count == 0 {
                // no spacers at all: the pool is empty, nothing to collapse
                return Ok(Some(scalar::zero()));
            }
            // each tail stage sheds one cell of width w_{n+t} per spacer
            let shed_total = &info.w / scalar::rat(r as i64 - 1, 1);
            debug_assert_eq!(
                &shed_total * scalar::rat(count as i64, 1),
                frag.mass()
            );
            Ok(Some(shed_total * scalar::rat(hits as i64, 1)))
        }
    }
}

/// Memoized stabilized memberships: whether deep copies of a fixed low
/// level (or the deep pool) end up inside or outside the target. `None`
/// means stability is only reached past the current stage.
#[derive(Default)]
struct Memberships {
    levels: HashMap<u128, (bool, u32)>,
    pool: Option<(bool, u32)>,
}

impl Memberships {
    fn lookup(
        &mut self,
        engine: &Engine,
        b: &IntervalSet,
        landing: &Landing,
        current: u32,
    ) -> Result<Option<bool>> {
        let (value, stable_at) = match landing {
            Landing::Level(l) => {
                if let Some(hit) = self.levels.get(l) {
                    *hit
                } else {
                    let hit = level_membership(engine, b, *l)?;
                    self.levels.insert(*l, hit);
                    hit
                }
            }
            Landing::PoolRegion => {
                if let Some(hit) = self.pool {
                    hit
                } else {
                    let hit = pool_membership(engine, b)?;
                    self.pool = Some(hit);
                    hit
                }
            }
        };
        Ok((stable_at <= current).then_some(value))
    }
}

/// First stage from which level `l` lies entirely inside or outside `b`.
/// Valid for all deeper stages because level `l` of stage `m+1` is the
/// leftmost slice of level `l` of stage `m`.
fn level_membership(engine: &Engine, b: &IntervalSet, l: u128) -> Result<(bool, u32)> {
    for m in 1..=engine.stage_cap() {
        let info = engine.stage_info(m)?;
        if info.h <= l {
            continue;
        }
        let left = engine.level_left(m, l)?;
        let right = &left + &info.w;
        let ov = b.overlap_measure(&left, &right);
        if ov == scalar::zero() {
            return Ok((false, m));
        }
        if ov == info.w {
            return Ok((true, m));
        }
    }
    Err(Error::resource(format!(
        "membership of level {l} never stabilizes below the stage cap"
    )))
}

/// First stage from which the pool lies entirely inside or outside `b`.
fn pool_membership(engine: &Engine, b: &IntervalSet) -> Result<(bool, u32)> {
    for m in 1..=engine.stage_cap() {
        let info = engine.stage_info(m)?;
        let mass = info.pool_mass();
        if mass == scalar::zero() {
            return Ok((false, m));
        }
        let ov = b.overlap_measure(&info.pool_start, &scalar::one());
        if ov == scalar::zero() {
            return Ok((false, m));
        }
        if ov == mass {
            return Ok((true, m));
        }
    }
    Err(Error::resource(
        "pool membership never stabilizes below the stage cap",
    ))
}
