//! Product correlations, interleaved scheme pairs, and sweeping-out probes.

use num::bigint::BigInt;
use serde::Serialize;

use super::rect::RectSet;
use super::seq::{sample_distinct, SequenceSpec};
use crate::certified::CertifiedValue;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, serde_scalar, Scalar};
use crate::scheme::{SchemeSpec, StageRule};

/// Enclosure of `mu x mu((S x T)^k A n B)` for rect sets on a product of
/// two schemes, factorized column by column:
/// `(S x T)^k (U x V) n (U' x V')` has measure
/// `mu(S^k U n U') * mu(T^k V n V')`, and both rect sets decompose into
/// pairwise disjoint products, so the pair contributions sum exactly.
pub fn product_correlation(
    engine_x: &Engine,
    engine_y: &Engine,
    a: &RectSet,
    b: &RectSet,
    k: i64,
    eps: &Scalar,
) -> Result<CertifiedValue> {
    if *eps <= scalar::zero() {
        return Err(Error::Validation("epsilon must be positive".into()));
    }
    let a = a.canonical();
    let b = b.canonical();
    let pairs = (a.pieces().len() * b.pieces().len()).max(1);
    // enclosure widths add across pairs and factors (values are in [0,1])
    let per_factor = eps / scalar::rat(2 * pairs as i64, 1);
    let mut total = CertifiedValue::exact(scalar::zero());
    for ra in a.pieces() {
        for rb in b.pieces() {
            let cx = engine_x.correlation(&ra.x, &rb.x, k, &per_factor)?;
            let cy = engine_y.correlation(&ra.y, &rb.y, k, &per_factor)?;
            total = total.add(&cx.mul(&cy));
        }
    }
    Ok(total)
}

fn rigid_rule() -> StageRule {
    StageRule { cuts: 3, spacers: vec![0, 0, 0] }
}

fn mixing_rule() -> StageRule {
    SchemeSpec::staircase4().tail
}

/// Two finite-prefix schemes whose rigid and mixing windows alternate in
/// opposite phase: while one runs spacer-free cutting stages (so `T^{h_n}`
/// moves at most the two boundary subcolumns of any level), the other runs
/// staircase stages, and vice versa. Both tails default to the staircase.
pub fn interleaved_pair(windows: &[(u32, u32)]) -> Result<(SchemeSpec, SchemeSpec)> {
    if windows.is_empty() {
        return Err(Error::Validation("at least one window is required".into()));
    }
    for (i, (r, m)) in windows.iter().enumerate() {
        if *r < 1 || *m < 1 {
            return Err(Error::Validation(format!(
                "window {i} has a zero-length phase"
            )));
        }
    }
    let mut p1 = Vec::new();
    let mut p2 = Vec::new();
    for (r, m) in windows {
        for _ in 0..*r {
            p1.push(rigid_rule());
            p2.push(mixing_rule());
        }
        for _ in 0..*m {
            p1.push(mixing_rule());
            p2.push(rigid_rule());
        }
    }
    Ok((
        SchemeSpec::new(p1, mixing_rule())?,
        SchemeSpec::new(p2, mixing_rule())?,
    ))
}

/// Certified upper bound on `d(T^{h_n} L, L)` for level `idx` of stage `n`.
pub fn level_shift_defect(engine: &Engine, n: u32, idx: u128, eps: &Scalar) -> Result<Scalar> {
    let level = engine.level_interval(n, idx)?;
    let (_, h, _) = engine.stage_summary(n)?;
    let k = i64::try_from(h).map_err(|_| Error::resource("height exceeds i64"))?;
    let img = engine.forward_image(&level, k, eps)?;
    // the unresolved source may or may not return; count it fully lost
    Ok(img.resolved.symdiff(&level.difference(&img.source_unresolved)).measure()
        + &img.unresolved_mass)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub l: usize,
    pub shift: i64,
    pub coverage: CertifiedValue,
}

/// Cumulative certified coverage `mu(U_{i<=L} T^{k_i} A)` per prefix of the
/// sequence. Lower endpoints are monotone nondecreasing in `L`.
pub fn sweep_probe(
    engine: &Engine,
    a: &IntervalSet,
    seq: &SequenceSpec,
    eps: &Scalar,
) -> Result<Vec<SweepRow>> {
    if a.measure() <= scalar::zero() {
        return Err(Error::Validation("A must have positive measure".into()));
    }
    if *eps <= scalar::zero() {
        return Err(Error::Validation("epsilon must be positive".into()));
    }
    let shifts = seq.expand(engine)?;
    let per_shift = eps / scalar::rat(shifts.len() as i64, 1);
    let mut covered = IntervalSet::empty();
    let mut slack = scalar::zero();
    let mut rows = Vec::with_capacity(shifts.len());
    for (i, &k) in shifts.iter().enumerate() {
        let img = engine.forward_image(a, k, &per_shift)?;
        covered = covered.union(&img.resolved);
        slack += &img.unresolved_mass;
        let lo = covered.measure();
        let hi = &lo + &slack;
        rows.push(SweepRow {
            l: i + 1,
            shift: k,
            coverage: CertifiedValue::new(
                lo,
                if hi > scalar::one() { scalar::one() } else { hi },
            )?,
        });
    }
    Ok(rows)
}

/// Worst observed coverage over sampled shift tuples. A sampled diagnostic,
/// not an exhaustive certificate: `trials` tuples of `n` distinct shifts
/// are drawn from `1..=max_shift` with the recorded seed.
#[derive(Debug, Clone, Serialize)]
pub struct UsoReport {
    pub n: u32,
    pub trials: u32,
    pub seed: u64,
    pub max_shift: i64,
    #[serde(with = "serde_scalar")]
    pub worst_lo: Scalar,
    pub worst_tuple: Vec<i64>,
    pub exhaustive: bool,
}

pub fn uso_probe(
    engine: &Engine,
    a: &IntervalSet,
    n: u32,
    trials: u32,
    seed: u64,
    max_shift: i64,
    eps: &Scalar,
) -> Result<UsoReport> {
    if trials < 1 {
        return Err(Error::Validation("trials must be >= 1".into()));
    }
    if n < 1 {
        return Err(Error::Validation("tuple length must be >= 1".into()));
    }
    let mut worst: Option<(Scalar, Vec<i64>)> = None;
    for t in 0..trials {
        // derive per-trial seeds so tuples are independent but reproducible
        let tuple = sample_distinct(seed.wrapping_add(t as u64), n, max_shift)?;
        let rows = sweep_probe(
            engine,
            a,
            &SequenceSpec::Explicit { shifts: tuple.clone() },
            eps,
        )?;
        let lo = rows.last().unwrap().coverage.lo.clone();
        if worst.as_ref().map(|(w, _)| lo < *w).unwrap_or(true) {
            worst = Some((lo, tuple));
        }
    }
    let (worst_lo, worst_tuple) = worst.unwrap();
    Ok(UsoReport {
        n,
        trials,
        seed,
        max_shift,
        worst_lo,
        worst_tuple,
        exhaustive: false,
    })
}

/// `mu(A) * k` never exceeds 1, so `k` translates of `A` can cover the
/// space only if `k >= 1/mu(A)`; handy exact lower bound for probes.
pub fn min_cover_count(a: &IntervalSet) -> Result<BigInt> {
    let m = a.measure();
    if m <= scalar::zero() {
        return Err(Error::Validation("A must have positive measure".into()));
    }
    Ok((scalar::one() / m).ceil().to_integer())
}
