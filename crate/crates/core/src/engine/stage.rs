//! Materialized stages and Rohlin towers.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{level_left_in, Engine};
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

/// A fully materialized stage-`n` tower: ordered level intervals (bottom =
/// index 0) and the unused pool. Only sensible below the height cap; the
/// engine itself never needs this form.
#[derive(Debug, Clone)]
pub struct Stage {
    pub n: u32,
    pub width: Scalar,
    pub height: u128,
    pub levels: Vec<(Scalar, Scalar)>,
    pub pool: IntervalSet,
}

impl Stage {
    pub fn level_set(&self, idx: usize) -> Result<IntervalSet> {
        let (a, b) = self.levels.get(idx).ok_or_else(|| {
            Error::Validation(format!("level index {idx} out of range"))
        })?;
        IntervalSet::interval(a.clone(), b.clone())
    }

    /// Union of the listed levels as a canonical set.
    pub fn levels_union(&self, indices: impl IntoIterator<Item = usize>) -> Result<IntervalSet> {
        let mut pieces = Vec::new();
        for idx in indices {
            let (a, b) = self.levels.get(idx).ok_or_else(|| {
                Error::Validation(format!("level index {idx} out of range"))
            })?;
            pieces.push((a.clone(), b.clone()));
        }
        IntervalSet::from_pieces(pieces)
    }
}

impl Serialize for Stage {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = ser.serialize_struct("Stage", 5)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("w", &scalar::format(&self.width))?;
        st.serialize_field("h", &self.height)?;
        let levels: Vec<[String; 2]> = self
            .levels
            .iter()
            .map(|(a, b)| [scalar::format(a), scalar::format(b)])
            .collect();
        st.serialize_field("levels", &levels)?;
        st.serialize_field("pool", &self.pool)?;
        st.end()
    }
}

pub(super) fn materialize(engine: &Engine, n: u32) -> Result<Stage> {
    let stages = engine.stages_up_to(n)?;
    let info = stages.last().unwrap();
    if info.h > engine.height_cap {
        return Err(Error::resource(format!(
            "stage {n} height {} exceeds the height cap {}",
            info.h, engine.height_cap
        )));
    }
    let mut levels = Vec::with_capacity(info.h as usize);
    for idx in 0..info.h {
        let left = level_left_in(&stages, n, idx);
        let right = &left + &info.w;
        levels.push((left, right));
    }
    let pool = IntervalSet::interval(info.pool_start.clone(), scalar::one())?;
    Ok(Stage {
        n,
        width: info.w.clone(),
        height: info.h,
        levels,
        pool,
    })
}

/// Base and error set of a height-`h` Rohlin tower with `mu(E) < delta`:
/// picks the least stage `N` where the leftover levels plus the pool fall
/// under `delta`, and takes every `h`-th level as the base. The `h` layers
/// are then exact within-stage translates and their union misses exactly
/// the leftover levels and the pool.
pub(super) fn rohlin_tower(
    engine: &Engine,
    h: u128,
    delta: &Scalar,
) -> Result<(IntervalSet, IntervalSet, u32)> {
    if h < 1 {
        return Err(Error::Validation("tower height must be >= 1".into()));
    }
    if *delta <= scalar::zero() {
        return Err(Error::Validation("delta must be positive".into()));
    }
    for n in 1..=engine.stage_cap() {
        let info = engine.stage_info(n)?;
        let leftover = info.h % h;
        let err_mass = &info.w * num::BigInt::from(leftover) + info.pool_mass();
        if err_mass < *delta {
            let copies = info.h / h;
            let covered = copies * h;
            if covered > engine.height_cap {
                return Err(Error::resource(format!(
                    "tower at stage {n} would cover {covered} levels, above the height cap"
                )));
            }
            let stages = engine.stages_up_to(n)?;
            let mut base_pieces = Vec::with_capacity(copies as usize);
            let mut covered_pieces = Vec::with_capacity(covered as usize);
            for idx in 0..covered {
                let left = level_left_in(&stages, n, idx);
                let right = &left + &info.w;
                if idx % h == 0 {
                    base_pieces.push((left.clone(), right.clone()));
                }
                covered_pieces.push((left, right));
            }
            let base = IntervalSet::from_pieces(base_pieces)?;
            let error_set = IntervalSet::from_pieces(covered_pieces)?.complement();
            return Ok((base, error_set, n));
        }
    }
    Err(Error::resource(format!(
        "no stage below the cap achieves tower error < {}",
        scalar::format(delta)
    )))
}
