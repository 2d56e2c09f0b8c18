//! Pointwise orbits: exact evaluation of `T^k x` with stage refinement.

use num::bigint::BigInt;

use super::{div_floor, level_left_in, spacer_level_index, Engine};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// `T` is only a.e.-defined at finite depth, so an orbit step that the
/// stage cap cannot resolve is a documented return, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitResult {
    Point(Scalar),
    Unresolved,
}

pub(super) fn orbit_point(
    engine: &Engine,
    x: &Scalar,
    k: i64,
    stage_cap: u32,
) -> Result<OrbitResult> {
    if *x < scalar::zero() || *x >= scalar::one() {
        return Err(Error::Validation(format!(
            "point {} outside [0,1)",
            scalar::format(x)
        )));
    }
    let step: i64 = if k >= 0 { 1 } else { -1 };
    let mut x = x.clone();
    for _ in 0..k.unsigned_abs() {
        match single_step(engine, &x, step, stage_cap)? {
            Some(y) => x = y,
            None => return Ok(OrbitResult::Unresolved),
        }
    }
    Ok(OrbitResult::Point(x))
}

/// One application of `T` (`step = 1`) or `T^{-1}` (`step = -1`).
fn single_step(
    engine: &Engine,
    x: &Scalar,
    step: i64,
    stage_cap: u32,
) -> Result<Option<Scalar>> {
    let mut stages = engine.stages_up_to(1)?;
    // Location of x at the current stage: Some((idx, left)) or pool.
    let mut loc: Option<(u128, Scalar)> = if x < &stages[0].w {
        Some((0, scalar::zero()))
    } else {
        None
    };
    let mut n: u32 = 1;
    loop {
        let info = stages[n as usize - 1].clone();
        if let Some((idx, left)) = &loc {
            let target = if step > 0 {
                (idx + 1 < info.h).then_some(idx + 1)
            } else {
                idx.checked_sub(1)
            };
            if let Some(t) = target {
                let target_left = level_left_in(&stages, n, t);
                return Ok(Some(x - left + target_left));
            }
        }
        if n == stage_cap {
            return Ok(None);
        }
        n += 1;
        stages = engine.stages_up_to(n)?;
        let next = &stages[n as usize - 1];
        let sub = next.sub.as_ref().expect("stage above 1 has structure");
        loc = match loc {
            Some((idx, left)) => {
                let j = div_floor(&(x - &left), &next.w) as u128;
                let cell_left = &left + &next.w * BigInt::from(j);
                Some((sub.block_prefix[j as usize] + idx, cell_left))
            }
            None => {
                if *x < next.pool_start {
                    let q = div_floor(&(x - &sub.prev_pool_start), &next.w) as u64;
                    let cell_left = &sub.prev_pool_start + &next.w * BigInt::from(q);
                    Some((spacer_level_index(sub, q), cell_left))
                } else {
                    None
                }
            }
        };
    }
}
