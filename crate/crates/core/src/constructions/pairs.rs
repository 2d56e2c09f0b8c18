//! Refinement of disjoint pair families and the generator algebras built
//! from them.

use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::{self, Scalar};

/// An unrefined candidate pair `(C, D)` with its tolerance.
#[derive(Debug, Clone)]
pub struct RawPair {
    pub c: IntervalSet,
    pub d: IntervalSet,
    pub eps: Scalar,
}

/// A family of pairs made pairwise disjoint across the whole list by
/// subtracting every later pair from every earlier one.
#[derive(Debug, Clone)]
pub struct PairFamily {
    pub pairs: Vec<RawPair>,
    /// Positions of the selected pairs within the input list.
    pub selected: Vec<usize>,
}

impl PairFamily {
    /// Exact disjointness across all `2 * len` member sets.
    pub fn verify_disjoint(&self) -> Result<()> {
        let mut sets: Vec<&IntervalSet> = Vec::new();
        for p in &self.pairs {
            sets.push(&p.c);
            sets.push(&p.d);
        }
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if !sets[i].is_disjoint_from(sets[j]) {
                    return Err(Error::Precondition(format!(
                        "family sets {i} and {j} are not disjoint"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Selects a subsequence whose tail masses are controlled, then subtracts
/// later pairs from earlier ones: the pair at position `m` keeps
/// `C_m \ union of all later C u D`, and the selection guarantees that this
/// removes mass less than `eps_m / 4`.
pub fn thm3_refine_pairs(raw: &[RawPair]) -> Result<PairFamily> {
    for (i, p) in raw.iter().enumerate() {
        if !p.c.is_disjoint_from(&p.d) {
            return Err(Error::Validation(format!("input pair {i} is not disjoint")));
        }
        if p.eps <= scalar::zero() {
            return Err(Error::Validation(format!("input pair {i} has eps <= 0")));
        }
    }
    // right-to-left greedy pick: keep a pair whenever everything already
    // kept after it has total mass under eps/4
    let four = scalar::rat(4, 1);
    let mut selected_rev: Vec<usize> = Vec::new();
    let mut tail_mass = scalar::zero();
    for i in (0..raw.len()).rev() {
        let p = &raw[i];
        if &tail_mass * &four < p.eps {
            tail_mass += p.c.measure() + p.d.measure();
            selected_rev.push(i);
        }
    }
    let selected: Vec<usize> = selected_rev.into_iter().rev().collect();
    if selected.len() < 2 {
        return Err(Error::Precondition(
            "no subsequence of length >= 2 satisfies the tail-mass bound".into(),
        ));
    }
    let mut pairs: Vec<RawPair> = Vec::with_capacity(selected.len());
    for (pos, &i) in selected.iter().enumerate() {
        let mut later = IntervalSet::empty();
        for &j in &selected[pos + 1..] {
            later = later.union(&raw[j].c).union(&raw[j].d);
        }
        pairs.push(RawPair {
            c: raw[i].c.difference(&later),
            d: raw[i].d.difference(&later),
            eps: raw[i].eps.clone(),
        });
    }
    let family = PairFamily { pairs, selected };
    family.verify_disjoint()?;
    Ok(family)
}

/// What a generator picks out of the pair at position `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternPiece {
    Empty,
    C,
    D,
    Both,
}

impl PatternPiece {
    fn from_digit(d: u32) -> Self {
        match d {
            0 => PatternPiece::Empty,
            1 => PatternPiece::C,
            2 => PatternPiece::D,
            _ => PatternPiece::Both,
        }
    }
}

/// Base-4 digit `i` (1-indexed from the least significant end) of `m`.
pub fn base4_digit(i: u32, m: u64) -> u32 {
    ((m / 4u64.pow(i - 1)) % 4) as u32
}

/// Finite truncation of a generator sequence in which every finite pattern
/// of pieces occurs for infinitely many `m`: generator `i` takes from pair
/// `m` the piece named by the `i`-th base-4 digit of `m`.
#[derive(Debug, Clone)]
pub struct AlgebraTruncation {
    pub generators: Vec<IntervalSet>,
    pub depth: u32,
    pub range: usize,
}

impl AlgebraTruncation {
    pub fn pattern(&self, i: u32, m: u64) -> PatternPiece {
        PatternPiece::from_digit(base4_digit(i, m))
    }

    /// Exact consistency: `F_i n (C_m u D_m)` equals the assigned piece for
    /// every generator and every pair in range.
    pub fn verify(&self, family: &PairFamily) -> Result<()> {
        for (gi, f) in self.generators.iter().enumerate() {
            let i = gi as u32 + 1;
            for m in 1..=self.range as u64 {
                let pair = &family.pairs[m as usize - 1];
                let got = f.intersect(&pair.c.union(&pair.d));
                let want = assigned_piece(self.pattern(i, m), pair);
                if got != want {
                    return Err(Error::Precondition(format!(
                        "generator {i} disagrees with its pattern at pair {m}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn assigned_piece(piece: PatternPiece, pair: &RawPair) -> IntervalSet {
    match piece {
        PatternPiece::Empty => IntervalSet::empty(),
        PatternPiece::C => pair.c.clone(),
        PatternPiece::D => pair.d.clone(),
        PatternPiece::Both => pair.c.union(&pair.d),
    }
}

pub fn thm3_algebra_generators(
    family: &PairFamily,
    depth: u32,
    range: usize,
) -> Result<AlgebraTruncation> {
    if family.pairs.len() < range {
        return Err(Error::Validation(format!(
            "family has {} pairs, range asks for {range}",
            family.pairs.len()
        )));
    }
    let mut generators = Vec::with_capacity(depth as usize);
    for i in 1..=depth {
        let mut f = IntervalSet::empty();
        for m in 1..=range as u64 {
            let pair = &family.pairs[m as usize - 1];
            let piece = assigned_piece(PatternPiece::from_digit(base4_digit(i, m)), pair);
            f = f.union(&piece);
        }
        generators.push(f);
    }
    let trunc = AlgebraTruncation { generators, depth, range };
    trunc.verify(family)?;
    Ok(trunc)
}

/// Generator index set: `F_i` collects `C_n` for `n = m * 2^{i+1} + j`,
/// `1 <= j <= 2^i`, truncated to the available indices (1-based input list).
pub fn thm5_index_set(i: u32, max_index: usize) -> Vec<usize> {
    let block = 2usize.pow(i + 1);
    let take = 2usize.pow(i);
    let mut out = Vec::new();
    let mut m = 0usize;
    loop {
        let base = m * block;
        if base + 1 > max_index {
            break;
        }
        for j in 1..=take {
            let idx = base + j;
            if idx <= max_index {
                out.push(idx);
            }
        }
        m += 1;
    }
    out
}

pub fn thm5_generators(
    c_list: &[IntervalSet],
    k: u32,
) -> Result<Vec<(IntervalSet, Vec<usize>)>> {
    for a in 0..c_list.len() {
        for b in a + 1..c_list.len() {
            if !c_list[a].is_disjoint_from(&c_list[b]) {
                return Err(Error::Validation(format!(
                    "input sets {} and {} are not disjoint",
                    a + 1,
                    b + 1
                )));
            }
        }
    }
    let mut out = Vec::with_capacity(k as usize);
    for i in 1..=k {
        let indices = thm5_index_set(i, c_list.len());
        let mut f = IntervalSet::empty();
        for &idx in &indices {
            f = f.union(&c_list[idx - 1]);
        }
        out.push((f, indices));
    }
    Ok(out)
}
