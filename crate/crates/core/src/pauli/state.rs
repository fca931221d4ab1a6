use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::f2::BitVector;

/// Largest `n` for which Bell states (on `2n` qubits) are built densely.
pub const MAX_BELL_QUBITS: usize = 6;

const NORM_TOL: f64 = 1e-10;

/// Dense state of `n_qubits` qubits.
///
/// Basis index convention: qubit `i` is bit `n_qubits − 1 − i` of the index,
/// so `|z₀ z₁ … ⟩` reads as a big-endian integer. For a bipartite state on
/// `A ⊗ B` with `n` qubits each, `A` holds the high `n` bits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVec {
    n_qubits: usize,
    amps: DVector<Complex64>,
}

impl StateVec {
    pub fn new(n_qubits: usize, amps: DVector<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        let norm = amps.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm² is {norm}, expected 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Computational basis state `|bits⟩`.
    pub fn basis(bits: &BitVector) -> Self {
        let n = bits.len();
        let mut amps = DVector::zeros(1usize << n);
        amps[basis_index(bits)] = Complex64::new(1.0, 0.0);
        Self { n_qubits: n, amps }
    }

    pub(crate) fn from_unnormalized(n_qubits: usize, amps: DVector<Complex64>) -> Self {
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVec) -> Complex64 {
        self.amps.dotc(&other.amps)
    }
}

/// Big-endian index of a bit string (entry 0 is the most significant bit).
pub fn basis_index(bits: &BitVector) -> usize {
    let n = bits.len();
    bits.ones()
        .fold(0usize, |acc, i| acc | (1usize << (n - 1 - i)))
}

/// Bit-string label `(α, β)` of a Bell basis state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BellIndex {
    pub alpha: BitVector,
    pub beta: BitVector,
}

impl BellIndex {
    pub fn new(alpha: BitVector, beta: BitVector) -> Result<Self> {
        if alpha.len() != beta.len() || alpha.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "alpha has {} bits, beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            alpha: BitVector::zeros(n),
            beta: BitVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }
}

/// `(I ⊗ σ₁^α σ₃^β) · 2^{−n/2} Σ_z |z z⟩ = 2^{−n/2} Σ_z (−1)^{β·z} |z, z+α⟩`.
pub fn bell_state(idx: &BellIndex) -> Result<StateVec> {
    let n = idx.n();
    if n > MAX_BELL_QUBITS {
        return Err(Error::Resource(format!(
            "Bell state on 2x{n} qubits exceeds the {MAX_BELL_QUBITS}-qubit dense limit"
        )));
    }
    let a = basis_index(&idx.alpha);
    let b = basis_index(&idx.beta);
    let dim = 1usize << n;
    let scale = (dim as f64).sqrt().recip();
    let mut amps = DVector::zeros(dim * dim);
    for z in 0..dim {
        let sign = if (b & z).count_ones() % 2 == 1 {
            -scale
        } else {
            scale
        };
        amps[(z << n) | (z ^ a)] = Complex64::new(sign, 0.0);
    }
    Ok(StateVec {
        n_qubits: 2 * n,
        amps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_bell(n: usize) -> Vec<StateVec> {
        let dim = 1u64 << n;
        let mut out = Vec::new();
        for a in 0..dim {
            for b in 0..dim {
                let idx =
                    BellIndex::new(BitVector::from_u64(n, a), BitVector::from_u64(n, b)).unwrap();
                out.push(bell_state(&idx).unwrap());
            }
        }
        out
    }

    #[test]
    fn n1_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = bell_state(&BellIndex::zero(1)).unwrap();
        let expect = [s, 0.0, 0.0, s];
        for (i, e) in expect.iter().enumerate() {
            assert!((phi.amplitudes()[i].re - e).abs() < 1e-15);
        }
        let idx = BellIndex::new("1".parse().unwrap(), "0".parse().unwrap()).unwrap();
        let psi = bell_state(&idx).unwrap();
        let expect = [0.0, s, s, 0.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((psi.amplitudes()[i].re - e).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_label_uniform_on_diagonal() {
        let n = 3;
        let phi = bell_state(&BellIndex::zero(n)).unwrap();
        let amp = 2f64.powf(-(n as f64) / 2.0);
        for a in 0..8usize {
            for b in 0..8usize {
                let v = phi.amplitudes()[(a << n) | b];
                let want = if a == b { amp } else { 0.0 };
                assert!((v.re - want).abs() < 1e-15 && v.im == 0.0);
            }
        }
    }

    #[test]
    fn n2_bell_basis_orthonormal() {
        let states = all_bell(2);
        assert_eq!(states.len(), 16);
        for (i, s) in states.iter().enumerate() {
            for (j, t) in states.iter().enumerate() {
                let g = s.inner(t);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.re - want).abs() < 1e-12 && g.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn too_many_qubits() {
        assert!(matches!(
            bell_state(&BellIndex::zero(7)),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn state_norm_checked() {
        let amps = DVector::from_element(2, Complex64::new(1.0, 0.0));
        assert!(StateVec::new(1, amps).is_err());
    }
}
