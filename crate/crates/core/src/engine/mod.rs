//! The rank-one tower engine: builds stages from a scheme and computes exact
//! orbits, set images under `T^k`, and certified correlation enclosures.
//!
//! The geometric realization lives on `[0,1)`: stage 1 is the single level
//! `[0,w_1)` with pool `[w_1,1)`; stage `n+1` cuts every level of stage `n`
//! into `r_n` equal sublevels, stacks the subcolumns left to right, and
//! carves each spacer from the leftmost unused portion of the pool. Because
//! spacers always come off the left end, the pool is a single interval
//! `[pool_start, 1)` at every stage and every level position is computable
//! from its index alone. Stage records are tiny (no level lists), so the
//! engine reaches heights far beyond anything that could be materialized.

mod exact;
mod image;
mod oracle;
mod orbit;
mod stage;

pub use image::PartialImage;
pub use oracle::GridOracle;
pub use orbit::OrbitResult;
pub use stage::Stage;

use std::sync::{Arc, RwLock};

use num::bigint::BigInt;
use num::ToPrimitive;

use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};
use crate::scheme::SchemeSpec;

/// Default unresolved-mass budget: `1/1000000`.
pub fn default_epsilon() -> Scalar {
    scalar::rat(1, 1_000_000)
}

pub const DEFAULT_STAGE_CAP: u32 = 40;
pub const DEFAULT_HEIGHT_CAP: u128 = 2_000_000;

/// How stage `n` decomposes into copies of stage `n-1` plus spacers.
#[derive(Debug)]
pub(crate) struct SubStructure {
    pub h_prev: u128,
    /// `block_prefix[j]` = first level index of subcolumn `j`; length `cuts+1`.
    pub block_prefix: Vec<u128>,
    /// `spacer_prefix[j]` = number of spacers allocated before subcolumn `j`.
    pub spacer_prefix: Vec<u64>,
    /// Pool start of stage `n-1`; spacer cells are carved starting here.
    pub prev_pool_start: Scalar,
}

#[derive(Debug)]
pub(crate) struct StageInfo {
    pub n: u32,
    pub w: Scalar,
    pub h: u128,
    /// The pool of this stage is exactly `[pool_start, 1)`.
    pub pool_start: Scalar,
    pub sub: Option<SubStructure>,
}

impl StageInfo {
    pub fn pool_mass(&self) -> Scalar {
        scalar::one() - &self.pool_start
    }
}

pub struct Engine {
    spec: SchemeSpec,
    w1: Scalar,
    stage_cap: u32,
    height_cap: u128,
    stages: RwLock<Vec<Arc<StageInfo>>>,
}

impl Engine {
    pub fn new(spec: SchemeSpec) -> Self {
        Self::with_caps(spec, DEFAULT_STAGE_CAP, DEFAULT_HEIGHT_CAP)
    }

    pub fn with_caps(spec: SchemeSpec, stage_cap: u32, height_cap: u128) -> Self {
        let (w1, _) = spec.normalize();
        Engine {
            spec,
            w1,
            stage_cap,
            height_cap,
            stages: RwLock::new(Vec::new()),
        }
    }

    pub fn spec(&self) -> &SchemeSpec {
        &self.spec
    }

    pub fn stage_cap(&self) -> u32 {
        self.stage_cap
    }

    pub fn base_width(&self) -> &Scalar {
        &self.w1
    }

    /// Stage records `1..=n`, extending the append-only cache as needed.
    pub(crate) fn stages_up_to(&self, n: u32) -> Result<Vec<Arc<StageInfo>>> {
        if n == 0 {
            return Err(Error::Validation("stage index must be >= 1".into()));
        }
        if n > self.stage_cap {
            return Err(Error::resource(format!(
                "stage {n} exceeds the stage cap {}",
                self.stage_cap
            )));
        }
        {
            let cache = self.stages.read().unwrap();
            if cache.len() >= n as usize {
                return Ok(cache[..n as usize].to_vec());
            }
        }
        let mut cache = self.stages.write().unwrap();
        if cache.is_empty() {
            cache.push(Arc::new(StageInfo {
                n: 1,
                w: self.w1.clone(),
                h: 1,
                pool_start: self.w1.clone(),
                sub: None,
            }));
        }
        while cache.len() < n as usize {
            let prev = cache.last().unwrap().clone();
            cache.push(Arc::new(self.extend(&prev)?));
        }
        Ok(cache[..n as usize].to_vec())
    }

    pub(crate) fn stage_info(&self, n: u32) -> Result<Arc<StageInfo>> {
        Ok(self.stages_up_to(n)?.pop().unwrap())
    }

    fn extend(&self, prev: &StageInfo) -> Result<StageInfo> {
        let rule = self.spec.rule_at(prev.n);
        let r = rule.cuts as u128;
        let spacer_total: u64 = rule.spacer_total();
        let h = prev
            .h
            .checked_mul(r)
            .and_then(|v| v.checked_add(spacer_total as u128))
            .ok_or_else(|| Error::resource("stage height overflow"))?;
        let w = &prev.w / scalar::rat(rule.cuts as i64, 1);
        let pool_start =
            &prev.pool_start + &w * BigInt::from(spacer_total);
        let mut block_prefix = Vec::with_capacity(rule.cuts as usize + 1);
        let mut spacer_prefix = Vec::with_capacity(rule.cuts as usize + 1);
        let mut bp: u128 = 0;
        let mut sp: u64 = 0;
        for s in &rule.spacers {
            block_prefix.push(bp);
            spacer_prefix.push(sp);
            bp += prev.h + *s as u128;
            sp += s;
        }
        block_prefix.push(bp);
        spacer_prefix.push(sp);
        debug_assert_eq!(bp, h);
        Ok(StageInfo {
            n: prev.n + 1,
            w,
            h,
            pool_start,
            sub: Some(SubStructure {
                h_prev: prev.h,
                block_prefix,
                spacer_prefix,
                prev_pool_start: prev.pool_start.clone(),
            }),
        })
    }

    /// Stage-`n` tower data: `(width, height, pool_mass)` without materializing.
    pub fn stage_summary(&self, n: u32) -> Result<(Scalar, u128, Scalar)> {
        let info = self.stage_info(n)?;
        Ok((info.w.clone(), info.h, info.pool_mass()))
    }

    /// Left endpoint of level `idx` of stage `n`, by descending the
    /// subcolumn decomposition. `O(n)` per lookup.
    pub fn level_left(&self, n: u32, idx: u128) -> Result<Scalar> {
        let stages = self.stages_up_to(n)?;
        Ok(level_left_in(&stages, n, idx))
    }

    /// The level as an interval `[left, left + w_n)`.
    pub fn level_interval(&self, n: u32, idx: u128) -> Result<IntervalSet> {
        let info = self.stage_info(n)?;
        if idx >= info.h {
            return Err(Error::Validation(format!(
                "level index {idx} out of range for stage {n} (height {})",
                info.h
            )));
        }
        let left = self.level_left(n, idx)?;
        let right = &left + &info.w;
        IntervalSet::interval(left, right)
    }

    /// The pool `[pool_start, 1)` of stage `n`.
    pub fn pool(&self, n: u32) -> Result<IntervalSet> {
        let info = self.stage_info(n)?;
        IntervalSet::interval(info.pool_start.clone(), scalar::one())
    }

    /// Certified enclosure for `mu(T^k A \cap B)`.
    pub fn correlation(
        &self,
        a: &IntervalSet,
        b: &IntervalSet,
        k: i64,
        eps: &Scalar,
    ) -> Result<CertifiedValue> {
        image::correlation(self, a, b, k, eps)
    }

    /// `mu(T^k A \cap B)` as an exact rational, collapsing the persistent
    /// fragment chains into closed-form tail sums. Only available when the
    /// eventual stage rule supports it (no trailing spacers while pool mass
    /// remains); callers should fall back to `correlation` otherwise.
    pub fn correlation_exact(
        &self,
        a: &IntervalSet,
        b: &IntervalSet,
        k: i64,
    ) -> Result<Scalar> {
        exact::correlation_exact(self, a, b, k)
    }

    /// Image of `A` under `T^k`, resolved up to unresolved mass `<= eps`.
    pub fn forward_image(
        &self,
        a: &IntervalSet,
        k: i64,
        eps: &Scalar,
    ) -> Result<PartialImage> {
        image::forward_image(self, a, k, eps)
    }

    /// `T^k x`, refining stages up to `stage_cap`.
    pub fn orbit_point(&self, x: &Scalar, k: i64, stage_cap: u32) -> Result<OrbitResult> {
        orbit::orbit_point(self, x, k, stage_cap)
    }

    /// Rohlin tower of height `h` with error set of measure `< delta`.
    /// Returns `(base, error_set, stage_used)`.
    pub fn rohlin_tower(
        &self,
        h: u128,
        delta: &Scalar,
    ) -> Result<(IntervalSet, IntervalSet, u32)> {
        stage::rohlin_tower(self, h, delta)
    }

    /// Fully materialized stage (levels listed bottom to top). Subject to
    /// the height cap.
    pub fn materialize_stage(&self, n: u32) -> Result<Stage> {
        stage::materialize(self, n)
    }

    /// Brute-force single-step cell table at stage `n`, built from midpoint
    /// orbits. Independent test pathway for correlations.
    pub fn grid_oracle(&self, n: u32) -> Result<GridOracle> {
        oracle::build(self, n)
    }
}

pub(crate) fn level_left_in(stages: &[Arc<StageInfo>], n: u32, idx: u128) -> Scalar {
    let mut acc = scalar::zero();
    let mut m = n as usize;
    let mut i = idx;
    loop {
        let info = &stages[m - 1];
        debug_assert!(i < info.h);
        match &info.sub {
            None => return acc,
            Some(sub) => {
                let j = sub.block_prefix.partition_point(|p| *p <= i) - 1;
                let off = i - sub.block_prefix[j];
                if off < sub.h_prev {
                    if j > 0 {
                        acc += &info.w * BigInt::from(j);
                    }
                    i = off;
                    m -= 1;
                } else {
                    let q = sub.spacer_prefix[j] as u128 + (off - sub.h_prev);
                    return acc + &sub.prev_pool_start + &info.w * BigInt::from(q);
                }
            }
        }
    }
}

/// Level index of the spacer with allocation order `q` within stage `n`'s
/// construction (stage described by `sub`).
pub(crate) fn spacer_level_index(sub: &SubStructure, q: u64) -> u128 {
    let j = sub.spacer_prefix.partition_point(|p| *p <= q) - 1;
    sub.block_prefix[j] + sub.h_prev + (q - sub.spacer_prefix[j]) as u128
}

pub(crate) fn div_floor(a: &Scalar, b: &Scalar) -> i128 {
    (a / b).floor().to_integer().to_i128().expect("index overflow")
}

pub(crate) fn div_ceil(a: &Scalar, b: &Scalar) -> i128 {
    (a / b).ceil().to_integer().to_i128().expect("index overflow")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn chacon() -> Engine {
        Engine::new(SchemeSpec::chacon3())
    }

    #[test]
    fn chacon_stage2_layout() {
        let eng = chacon();
        let stage = eng.materialize_stage(2).unwrap();
        assert_eq!(stage.height, 4);
        assert_eq!(stage.width, rat(2, 9));
        let expected = [
            (rat(0, 1), rat(2, 9)),
            (rat(2, 9), rat(4, 9)),
            (rat(2, 3), rat(8, 9)),
            (rat(4, 9), rat(2, 3)),
        ];
        assert_eq!(stage.levels, expected);
        assert_eq!(
            stage.pool,
            IntervalSet::interval(rat(8, 9), rat(1, 1)).unwrap()
        );
    }

    #[test]
    fn chacon_stage_heights_and_pool_mass() {
        let eng = chacon();
        let heights: Vec<u128> = (1..=6)
            .map(|n| eng.stage_summary(n).unwrap().1)
            .collect();
        assert_eq!(heights, [1, 4, 13, 40, 121, 364]);
        let (w, _, pool) = eng.stage_summary(3).unwrap();
        assert_eq!(w, rat(2, 27));
        assert_eq!(pool, rat(1, 27));
    }

    #[test]
    fn stage_levels_partition_with_pool() {
        for spec in [SchemeSpec::chacon3(), SchemeSpec::staircase4()] {
            let eng = Engine::new(spec);
            for n in 1..=4 {
                let stage = eng.materialize_stage(n).unwrap();
                let mut pieces = stage.levels.clone();
                pieces.extend(stage.pool.pieces().iter().cloned());
                let union = IntervalSet::from_pieces(pieces).unwrap();
                assert_eq!(union, IntervalSet::unit());
            }
        }
    }

    #[test]
    fn orbit_of_one_ninth() {
        let eng = chacon();
        let y = eng.orbit_point(&rat(1, 9), 1, 5).unwrap();
        assert_eq!(y, OrbitResult::Point(rat(1, 3)));
    }

    #[test]
    fn orbit_inverse_round_trip() {
        let eng = chacon();
        for num in [1, 5, 11, 17] {
            let x = rat(num, 27);
            if let OrbitResult::Point(y) = eng.orbit_point(&x, 3, 12).unwrap() {
                let back = eng.orbit_point(&y, -3, 12).unwrap();
                assert_eq!(back, OrbitResult::Point(x));
            } else {
                panic!("orbit of {num}/27 unresolved at stage 12");
            }
        }
    }

    #[test]
    fn orbit_matches_materialized_shift() {
        let eng = chacon();
        let stage = eng.materialize_stage(3).unwrap();
        let half_w = &stage.width / rat(2, 1);
        for i in 0..stage.height as usize - 1 {
            let mid = &stage.levels[i].0 + &half_w;
            let expect = &stage.levels[i + 1].0 + &half_w;
            assert_eq!(
                eng.orbit_point(&mid, 1, 3).unwrap(),
                OrbitResult::Point(expect)
            );
        }
    }

    #[test]
    fn forward_image_conserves_mass() {
        let eng = chacon();
        let a = eng.level_interval(2, 1).unwrap();
        for k in [-5i64, -1, 0, 1, 2, 7] {
            let img = eng.forward_image(&a, k, &default_epsilon()).unwrap();
            let total = img.resolved.measure() + &img.unresolved_mass;
            assert_eq!(total, a.measure());
            assert_eq!(img.source_unresolved.measure(), img.unresolved_mass);
        }
    }

    #[test]
    fn forward_image_of_base_level() {
        let eng = chacon();
        let base2 = eng.level_interval(2, 0).unwrap();
        let img = eng.forward_image(&base2, 1, &rat(1, 1_000_000_000)).unwrap();
        assert_eq!(img.unresolved_mass, scalar::zero());
        assert_eq!(img.resolved, eng.level_interval(2, 1).unwrap());
    }

    #[test]
    fn correlation_agrees_with_grid_oracle() {
        for spec in [SchemeSpec::chacon3(), SchemeSpec::staircase4()] {
            let eng = Engine::new(spec);
            let oracle = eng.grid_oracle(3).unwrap();
            oracle.verify_shift().unwrap();
            let a = eng.level_interval(2, 0).unwrap();
            let b = eng
                .level_interval(2, 0)
                .unwrap()
                .union(&eng.level_interval(2, 1).unwrap());
            for k in [-4i64, -1, 0, 1, 2, 5] {
                let engine_val = eng.correlation(&a, &b, k, &rat(1, 100_000)).unwrap();
                let oracle_val = oracle.correlation_enclosure(&a, &b, k).unwrap();
                assert!(
                    engine_val.intersects(&oracle_val),
                    "k={k}: engine {engine_val} vs oracle {oracle_val}"
                );
            }
        }
    }

    #[test]
    fn correlation_k_zero_is_exact_intersection() {
        let eng = chacon();
        let a = eng.level_interval(2, 0).unwrap();
        let b = IntervalSet::interval(rat(1, 9), rat(1, 2)).unwrap();
        let c = eng.correlation(&a, &b, 0, &default_epsilon()).unwrap();
        assert!(c.is_exact());
        assert_eq!(c.lo, a.intersect(&b).measure());
    }

    #[test]
    fn deep_correlation_stays_within_epsilon() {
        let eng = chacon();
        let a = eng.level_interval(3, 0).unwrap();
        let eps = rat(1, 1000);
        let c = eng.correlation(&a, &a, 121, &eps).unwrap();
        assert!(c.width() <= eps);
        // k = h_5, so about half of each level returns to itself (one of the
        // three subcolumns shifts cleanly, another shifts with an offset).
        assert!(c.lo > &a.measure() / rat(3, 1));
        assert!(c.hi < a.measure());
    }

    #[test]
    fn exact_correlation_matches_k_zero_and_enclosures() {
        let eng = chacon();
        let a = eng.level_interval(2, 0).unwrap();
        let b = eng
            .level_interval(2, 1)
            .unwrap()
            .union(&eng.level_interval(2, 3).unwrap());
        assert_eq!(
            eng.correlation_exact(&a, &b, 0).unwrap(),
            a.intersect(&b).measure()
        );
        for k in [-13i64, -5, -1, 1, 2, 4, 13, 40, 121] {
            let v = eng.correlation_exact(&a, &b, k).unwrap();
            for eps_den in [100i64, 100_000] {
                let c = eng.correlation(&a, &b, k, &rat(1, eps_den)).unwrap();
                assert!(
                    c.lo <= v && v <= c.hi,
                    "k={k}: exact {} outside [{}, {}]",
                    scalar::format(&v),
                    scalar::format(&c.lo),
                    scalar::format(&c.hi)
                );
            }
        }
    }

    #[test]
    fn exact_correlation_swaps_for_negative_k() {
        let eng = chacon();
        let a = eng.level_interval(3, 2).unwrap();
        let b = IntervalSet::interval(rat(1, 9), rat(1, 2)).unwrap();
        for k in [1i64, 3, 13, 41] {
            assert_eq!(
                eng.correlation_exact(&a, &b, -k).unwrap(),
                eng.correlation_exact(&b, &a, k).unwrap()
            );
        }
    }

    #[test]
    fn exact_correlation_handles_pool_mass() {
        let eng = chacon();
        // full space against itself: mu(T^k X n X) = 1 for every k
        let full = IntervalSet::unit();
        for k in [1i64, 4, 7, 40] {
            assert_eq!(eng.correlation_exact(&full, &full, k).unwrap(), rat(1, 1));
        }
        // pool of stage 2 against the base level
        let pool = eng.pool(2).unwrap();
        let b = eng.level_interval(2, 0).unwrap();
        let v = eng.correlation_exact(&pool, &b, 1).unwrap();
        let c = eng.correlation(&pool, &b, 1, &rat(1, 1_000_000)).unwrap();
        assert!(c.lo <= v && v <= c.hi);
        assert!(v > scalar::zero());
    }

    #[test]
    fn exact_correlation_rejects_staircase_pool_chains() {
        let eng = Engine::new(SchemeSpec::staircase4());
        let full = IntervalSet::unit();
        assert!(matches!(
            eng.correlation_exact(&full, &full, 1),
            Err(Error::Precondition(_))
        ));
        // sets without persistent pool chains still evaluate exactly
        let a = eng.level_interval(2, 0).unwrap();
        let v = eng.correlation_exact(&a, &a, 1).unwrap();
        let c = eng.correlation(&a, &a, 1, &rat(1, 1_000_000)).unwrap();
        assert!(c.lo <= v && v <= c.hi);
    }

    #[test]
    fn rohlin_tower_examples() {
        let eng = chacon();
        let (base, err, n) = eng.rohlin_tower(3, &rat(1, 10)).unwrap();
        let (w, h, _) = eng.stage_summary(n).unwrap();
        let copies = h / 3;
        assert_eq!(base.measure(), &w * BigInt::from(copies));
        assert!(err.measure() < rat(1, 10));
        // the three layers tile everything but the error set
        let eps = rat(1, 1_000_000_000);
        let mut covered = base.clone();
        let mut layer = base;
        for _ in 0..2 {
            let img = eng.forward_image(&layer, 1, &eps).unwrap();
            assert_eq!(img.unresolved_mass, scalar::zero());
            layer = img.resolved;
            assert!(layer.is_disjoint_from(&covered));
            covered = covered.union(&layer);
        }
        assert_eq!(covered.complement(), err);
    }

    #[test]
    fn rohlin_tower_height_one() {
        let eng = chacon();
        let (base, err, _) = eng.rohlin_tower(1, &rat(1, 50)).unwrap();
        assert_eq!(base.complement(), err);
        assert!(err.measure() < rat(1, 50));
    }

    #[test]
    fn stage_cap_is_enforced() {
        let eng = Engine::with_caps(SchemeSpec::chacon3(), 4, DEFAULT_HEIGHT_CAP);
        assert!(matches!(
            eng.stage_summary(5),
            Err(Error::Resource { .. })
        ));
        let a = eng.level_interval(2, 0).unwrap();
        let err = eng.correlation(&a, &a, 1000, &rat(1, 1_000_000)).unwrap_err();
        match err {
            Error::Resource { achieved: Some(m), .. } => assert!(m > scalar::zero()),
            other => panic!("expected resource error with achieved mass, got {other:?}"),
        }
    }

    #[test]
    fn stage_dump_serializes_rationals() {
        let eng = chacon();
        let stage = eng.materialize_stage(2).unwrap();
        let json = serde_json::to_value(&stage).unwrap();
        assert_eq!(json["n"], 2);
        assert_eq!(json["w"], "2/9");
        assert_eq!(json["h"], 4);
        assert_eq!(json["levels"][2][0], "2/3");
        assert_eq!(json["pool"][0][0], "8/9");
    }
}
