use rand::Rng;

use super::matrix::sample_invertible_with_inverse;
use super::BitMatrix;
use crate::error::{Error, Result};

/// Block decomposition of an invertible `L` and of `M = (L⁻¹)ᵀ`.
///
/// `L1`/`M1` are the first `k` rows, `L2`/`M2` the next `k` rows and
/// `L3`/`M3` the remaining `n − 2k` rows. `L1` and `M2` are the two parity-check
/// matrices; `M3` maps phase-basis outcomes to the key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySchedule {
    pub n: usize,
    pub k: usize,
    pub l: BitMatrix,
    pub l1: BitMatrix,
    pub l2: BitMatrix,
    pub l3: BitMatrix,
    pub m: BitMatrix,
    pub m1: BitMatrix,
    pub m2: BitMatrix,
    pub m3: BitMatrix,
}

impl KeySchedule {
    pub fn new(l: BitMatrix, k: usize) -> Result<Self> {
        Self::check_shape(&l, k)?;
        let inv = l.invert()?;
        Ok(Self::from_inverse(l, &inv, k))
    }

    /// Draw `L` uniformly over invertible matrices and derive the schedule.
    pub fn sample<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if 2 * k >= n {
            return Err(Error::InvalidParams(format!(
                "need 2k < n, got n={n}, k={k}"
            )));
        }
        let (l, inv) = sample_invertible_with_inverse(n, rng);
        Ok(Self::from_inverse(l, &inv, k))
    }

    fn check_shape(l: &BitMatrix, k: usize) -> Result<()> {
        if !l.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "L must be square, got {}x{}",
                l.rows(),
                l.cols()
            )));
        }
        if 2 * k >= l.rows() {
            return Err(Error::InvalidParams(format!(
                "need 2k < n, got n={}, k={k}",
                l.rows()
            )));
        }
        Ok(())
    }

    fn from_inverse(l: BitMatrix, inv: &BitMatrix, k: usize) -> Self {
        let n = l.rows();
        let m = inv.transpose();
        Self {
            n,
            k,
            l1: l.row_block(0, k),
            l2: l.row_block(k, 2 * k),
            l3: l.row_block(2 * k, n),
            m1: m.row_block(0, k),
            m2: m.row_block(k, 2 * k),
            m3: m.row_block(2 * k, n),
            l,
            m,
        }
    }

    /// Length of the output key, `n − 2k`.
    pub fn key_len(&self) -> usize {
        self.n - 2 * self.k
    }

    /// Stack `L1; L2; L3` back into one matrix.
    pub fn recompose_l(&self) -> BitMatrix {
        self.l1
            .vstack(&self.l2)
            .and_then(|a| a.vstack(&self.l3))
            .expect("blocks share column count")
    }
}
