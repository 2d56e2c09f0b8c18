//! The complement-of-preimages obstruction set and its certified correlations.

use crate::certified::CertifiedValue;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

/// `B = (union of T^{-i}A, 0 <= i <= N) complement`, held as an outer
/// enclosure: `b_outer` contains the true `B`, and the true measure lies in
/// `measure`. The gap is the preimage mass the stage cap left unplaced.
#[derive(Debug, Clone)]
pub struct Thm6Obstruction {
    pub n: u32,
    pub a: IntervalSet,
    /// Exact gate `mu(A) < 1/(2(N+1))`.
    pub feasible: bool,
    pub b_outer: IntervalSet,
    pub measure: CertifiedValue,
    /// Total unresolved preimage mass (the enclosure gap).
    pub slack: Scalar,
}

impl Thm6Obstruction {
    /// Upper bound on `mu(T^k A n B)`: since the true `B` is contained in
    /// `b_outer`, the enclosure against `b_outer` bounds it from above.
    pub fn correlation_upper(&self, engine: &Engine, k: i64, eps: &Scalar) -> Result<Scalar> {
        match engine.correlation_exact(&self.a, &self.b_outer, k) {
            Ok(v) => Ok(v),
            Err(Error::Precondition(_)) => {
                Ok(engine.correlation(&self.a, &self.b_outer, k, eps)?.hi)
            }
            Err(e) => Err(e),
        }
    }
}

pub fn thm6_obstruction(
    engine: &Engine,
    n: u32,
    a: &IntervalSet,
    eps: &Scalar,
) -> Result<Thm6Obstruction> {
    if *eps <= scalar::zero() {
        return Err(Error::Validation("epsilon must be positive".into()));
    }
    let gate = scalar::rat(1, 2 * (n as i64 + 1));
    let feasible = a.measure() < gate;
    let per_image = eps / scalar::rat(n as i64 + 1, 1);
    let mut union_inner = IntervalSet::empty();
    let mut slack = scalar::zero();
    for i in 0..=n {
        let pre = engine.forward_image(a, -(i as i64), &per_image)?;
        union_inner = union_inner.union(&pre.resolved);
        slack += &pre.unresolved_mass;
    }
    let b_outer = union_inner.complement();
    let outer_mass = b_outer.measure();
    let lo = {
        let candidate = &outer_mass - &slack;
        if candidate < scalar::zero() { scalar::zero() } else { candidate }
    };
    let measure = CertifiedValue::new(lo, outer_mass)?;
    Ok(Thm6Obstruction {
        n,
        a: a.clone(),
        feasible,
        b_outer,
        measure,
        slack,
    })
}
