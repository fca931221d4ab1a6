//! Exact linear algebra over GF(2).
//!
//! Vectors and matrices are bit-packed into `u64` words (bit `i` of a row lives
//! in word `i / 64`, position `i % 64`), so row operations are word-wise XORs.

mod bitvec;
mod count;
mod matrix;
mod schedule;

pub use bitvec::BitVector;
pub use count::{
    count_full_rank, exact_collision_probability, full_rank_matrices, two_universal_lower_bound,
};
pub use matrix::{sample_invertible, BitMatrix};
pub use schedule::KeySchedule;

pub(crate) const WORD: usize = 64;

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// Mask of the valid bits in the last word of a `bits`-long row.
pub(crate) fn tail_mask(bits: usize) -> u64 {
    match bits % WORD {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}
