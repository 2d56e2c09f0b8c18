//! Shift-sequence specifications for sweeping-out probes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::{Error, Result};

/// A finite list of distinct shifts, given explicitly or by a generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceSpec {
    Explicit { shifts: Vec<i64> },
    /// `k_i = h_i`, the stage heights of the scheme.
    Heights { count: u32 },
    Arithmetic { start: i64, step: i64, count: u32 },
    /// Distinct draws from `1..=max_shift` by a seeded generator.
    Seeded { seed: u64, count: u32, max_shift: i64 },
}

impl SequenceSpec {
    pub fn expand(&self, engine: &Engine) -> Result<Vec<i64>> {
        let shifts = match self {
            SequenceSpec::Explicit { shifts } => shifts.clone(),
            SequenceSpec::Heights { count } => {
                let mut out = Vec::with_capacity(*count as usize);
                for n in 1..=*count {
                    let (_, h, _) = engine.stage_summary(n)?;
                    out.push(i64::try_from(h).map_err(|_| {
                        Error::resource(format!("stage {n} height exceeds i64"))
                    })?);
                }
                out
            }
            SequenceSpec::Arithmetic { start, step, count } => {
                if *step == 0 {
                    return Err(Error::Validation("step must be nonzero".into()));
                }
                (0..*count as i64).map(|i| start + step * i).collect()
            }
            SequenceSpec::Seeded { seed, count, max_shift } => {
                sample_distinct(*seed, *count, *max_shift)?
            }
        };
        let mut seen = std::collections::HashSet::new();
        for &k in &shifts {
            if !seen.insert(k) {
                return Err(Error::Validation(format!("duplicate shift {k}")));
            }
        }
        if shifts.is_empty() {
            return Err(Error::Validation("sequence is empty".into()));
        }
        Ok(shifts)
    }
}

/// `count` distinct integers from `1..=max_shift`, reproducible per seed.
pub fn sample_distinct(seed: u64, count: u32, max_shift: i64) -> Result<Vec<i64>> {
    if max_shift < count as i64 {
        return Err(Error::Validation(format!(
            "cannot draw {count} distinct shifts from 1..={max_shift}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count as usize);
    while out.len() < count as usize {
        let k = rng.gen_range(1..=max_shift);
        if seen.insert(k) {
            out.push(k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::SchemeSpec;

    #[test]
    fn heights_sequence_matches_recurrence() {
        let eng = Engine::new(SchemeSpec::chacon3());
        let seq = SequenceSpec::Heights { count: 6 }.expand(&eng).unwrap();
        assert_eq!(seq, vec![1, 4, 13, 40, 121, 364]);
    }

    #[test]
    fn seeded_draws_are_reproducible_and_distinct() {
        let a = sample_distinct(7, 20, 100).unwrap();
        let b = sample_distinct(7, 20, 100).unwrap();
        assert_eq!(a, b);
        let set: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), 20);
        assert_ne!(a, sample_distinct(8, 20, 100).unwrap());
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        let eng = Engine::new(SchemeSpec::chacon3());
        assert!(SequenceSpec::Explicit { shifts: vec![3, 3] }.expand(&eng).is_err());
        assert!(SequenceSpec::Explicit { shifts: vec![] }.expand(&eng).is_err());
    }
}
