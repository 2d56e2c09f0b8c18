//! Brute-force grid oracle: an independent pathway for correlations.
//!
//! The oracle materializes a stage, evaluates `T` on the midpoint of every
//! level cell, and records the induced cell-to-cell table. Correlations are
//! then plain cell counting. Nothing here shares code with the fragment
//! engine beyond the stage geometry itself.

use super::{Engine, OrbitResult};
use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

pub struct GridOracle {
    pub n: u32,
    pub width: Scalar,
    pub height: u128,
    /// Level cells, bottom to top.
    pub cells: Vec<(Scalar, Scalar)>,
    /// `table[i]` = cell index of `T(midpoint of cell i)`, `None` when the
    /// orbit leaves the stage (top level). Domain: tower minus top level.
    pub table: Vec<Option<u128>>,
    pub pool: IntervalSet,
}

pub(super) fn build(engine: &Engine, n: u32) -> Result<GridOracle> {
    let stage = engine.materialize_stage(n)?;
    let two = scalar::rat(2, 1);
    let half_w = &stage.width / &two;
    // cells sorted by position for locating image points
    let mut by_left: Vec<(Scalar, u128)> = stage
        .levels
        .iter()
        .enumerate()
        .map(|(i, (a, _))| (a.clone(), i as u128))
        .collect();
    by_left.sort();
    let mut table = Vec::with_capacity(stage.levels.len());
    for (a, _) in &stage.levels {
        let mid = a + &half_w;
        let entry = match engine.orbit_point(&mid, 1, n)? {
            OrbitResult::Point(y) => {
                let pos = by_left.partition_point(|(left, _)| *left <= y) - 1;
                Some(by_left[pos].1)
            }
            OrbitResult::Unresolved => None,
        };
        table.push(entry);
    }
    Ok(GridOracle {
        n,
        width: stage.width,
        height: stage.height,
        cells: stage.levels,
        table,
        pool: stage.pool,
    })
}

impl GridOracle {
    /// Checks that the midpoint table is the within-tower shift `i -> i+1`
    /// on the tower minus the top level, and injective there.
    pub fn verify_shift(&self) -> Result<()> {
        for (i, entry) in self.table.iter().enumerate() {
            let expected = if (i as u128) + 1 < self.height {
                Some(i as u128 + 1)
            } else {
                None
            };
            if *entry != expected {
                return Err(Error::Precondition(format!(
                    "grid table at cell {i} is {entry:?}, expected {expected:?}"
                )));
            }
        }
        Ok(())
    }

    /// Whole-cell membership of `set` in cell `i`: `Some(true/false)` when
    /// the cell is entirely inside/outside, `None` when it straddles.
    fn cell_membership(&self, set: &IntervalSet, i: usize) -> Option<bool> {
        let (a, b) = &self.cells[i];
        let ov = set.overlap_measure(a, b);
        if ov == scalar::zero() {
            Some(false)
        } else if ov == self.width {
            Some(true)
        } else {
            None
        }
    }

    /// Reference enclosure for `mu(T^k A \cap B)` by cell counting: counts
    /// cells of `A` whose `k`-fold table image lands in `B`; cells whose
    /// orbit leaves the table domain, and any pool part of `A`, contribute
    /// to the enclosure width. Requires `A` and `B` to be unions of level
    /// cells (up to pool parts of `A`).
    pub fn correlation_enclosure(
        &self,
        a: &IntervalSet,
        b: &IntervalSet,
        k: i64,
    ) -> Result<CertifiedValue> {
        self.verify_shift()?;
        let h = self.height;
        let mut hits: u64 = 0;
        let mut unresolved_cells: u64 = 0;
        for i in 0..self.cells.len() {
            let in_a = self.cell_membership(a, i).ok_or_else(|| {
                Error::Precondition(format!("set A is not aligned with cell {i}"))
            })?;
            if !in_a {
                continue;
            }
            let target = if k >= 0 {
                let t = i as u128 + k as u128;
                (t < h).then_some(t)
            } else {
                (i as u128).checked_sub(k.unsigned_abs() as u128)
            };
            match target {
                Some(t) => {
                    let in_b = self.cell_membership(b, t as usize).ok_or_else(|| {
                        Error::Precondition(format!("set B is not aligned with cell {t}"))
                    })?;
                    if in_b {
                        hits += 1;
                    }
                }
                None => unresolved_cells += 1,
            }
        }
        let pool_mass = a.intersect(&self.pool).measure();
        let lo = &self.width * num::BigInt::from(hits);
        let unresolved = &self.width * num::BigInt::from(unresolved_cells) + pool_mass;
        CertifiedValue::new(lo.clone(), lo + unresolved)
    }
}
