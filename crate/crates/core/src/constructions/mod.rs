//! Set constructions layered on the tower engine: dense families from Rohlin
//! towers, refined disjoint pair families, generator algebras, first-return
//! decompositions, and sweeping-out obstructions.

mod dense;
mod mm;
mod obstruction;
mod pairs;

pub use dense::{lemma1_check, thm1_dense_family, DenseFamilyElement, Lemma1Report};
pub use mm::{first_return_decomposition, thm4_mm_pair, ReturnDecomposition, Thm4Pair};
pub use obstruction::{thm6_obstruction, Thm6Obstruction};
pub use pairs::{
    base4_digit, thm3_algebra_generators, thm3_refine_pairs, thm5_generators,
    thm5_index_set, AlgebraTruncation, PairFamily, PatternPiece, RawPair,
};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

/// Tolerance used where a translate is expected to resolve exactly.
fn tiny() -> Scalar {
    scalar::rat(1, i64::MAX)
}

/// `T^k` applied to a set that must resolve with no unresolved mass, such as
/// a within-tower translate.
fn exact_power(engine: &Engine, set: &IntervalSet, k: i64) -> Result<IntervalSet> {
    let img = engine.forward_image(set, k, &tiny())?;
    if img.unresolved_mass != scalar::zero() {
        return Err(Error::Precondition(format!(
            "translate by {k} left unresolved mass {}",
            scalar::format(&img.unresolved_mass)
        )));
    }
    Ok(img.resolved)
}
