//! Product-system experiments: rectangle sets on the square, factorized
//! product correlations, interleaved rigid/mixing scheme pairs, and
//! sweeping-out probes.

mod probes;
mod rect;
mod seq;

pub use probes::{
    interleaved_pair, level_shift_defect, min_cover_count, product_correlation,
    sweep_probe, uso_probe, SweepRow, UsoReport,
};
pub use rect::{fiber_heavy_base, residual_witness, RectPiece, RectSet, ResidualWitness};
pub use seq::{sample_distinct, SequenceSpec};
