use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::state::{StateVec, MAX_BELL_QUBITS};
use crate::error::{Error, Result};
use crate::f2::{BitMatrix, BitVector};

/// Tuple of commuting, independent, Y-free Pauli operators on `n` qubits.
///
/// Generator `i` is `σ₁^{xpart_i} σ₃^{zpart_i}`; no qubit carries both an X
/// and a Z factor, so every generator is Hermitian with real entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliTuple {
    n: usize,
    xpart: BitMatrix,
    zpart: BitMatrix,
}

impl PauliTuple {
    pub fn new(xpart: BitMatrix, zpart: BitMatrix) -> Result<Self> {
        if xpart.rows() != zpart.rows() || xpart.cols() != zpart.cols() {
            return Err(Error::DimensionMismatch(format!(
                "xpart {}x{} vs zpart {}x{}",
                xpart.rows(),
                xpart.cols(),
                zpart.rows(),
                zpart.cols()
            )));
        }
        let (m, n) = (xpart.rows(), xpart.cols());
        if m == 0 || n == 0 {
            return Err(Error::InvalidParams("empty Pauli tuple".into()));
        }
        for i in 0..m {
            let overlap = xpart
                .row_words(i)
                .iter()
                .zip(zpart.row_words(i))
                .any(|(a, b)| a & b != 0);
            if overlap {
                return Err(Error::InvalidParams(format!(
                    "generator {i} has a Y factor"
                )));
            }
        }
        // commute iff the symplectic form x·zᵀ + z·xᵀ vanishes, i.e. x·zᵀ is symmetric
        let xz = xpart.mul(&zpart.transpose())?;
        if xz != xz.transpose() {
            return Err(Error::InvalidParams("generators do not commute".into()));
        }
        let t = Self { n, xpart, zpart };
        if t.symplectic_rows().rank() != m {
            return Err(Error::InvalidParams("generators are dependent".into()));
        }
        Ok(t)
    }

    /// Z-type tuple `Hσ⃗₃`: generator `i` is `σ₃^{H_i}`.
    pub fn z_type(h: &BitMatrix) -> Result<Self> {
        Self::new(BitMatrix::zeros(h.rows(), h.cols()), h.clone())
    }

    /// X-type tuple `Hσ⃗₁`.
    pub fn x_type(h: &BitMatrix) -> Result<Self> {
        Self::new(h.clone(), BitMatrix::zeros(h.rows(), h.cols()))
    }

    /// Concatenate generator lists (must still commute and be independent).
    pub fn concat(&self, other: &PauliTuple) -> Result<Self> {
        Self::new(
            self.xpart.vstack(&other.xpart)?,
            self.zpart.vstack(&other.zpart)?,
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.xpart.rows()
    }

    pub fn xpart(&self) -> &BitMatrix {
        &self.xpart
    }

    pub fn zpart(&self) -> &BitMatrix {
        &self.zpart
    }

    /// Rows `(xpart_i | zpart_i)`, the `m × 2n` matrix ℱ(ĝ).
    pub fn symplectic_rows(&self) -> BitMatrix {
        let rows: Vec<BitVector> = (0..self.m())
            .map(|i| {
                let x = self.xpart.row(i);
                let z = self.zpart.row(i);
                let mut v = BitVector::zeros(2 * self.n);
                for j in x.ones() {
                    v.set(j, true);
                }
                for j in z.ones() {
                    v.set(self.n + j, true);
                }
                v
            })
            .collect();
        BitMatrix::from_rows(&rows).expect("rows share length")
    }

    /// ℱ(ĝ)·𝒮·(u; v) = xpart·v + zpart·u: the outcome shift caused by
    /// conjugating with `σ₁^u σ₃^v`.
    pub fn shift(&self, u: &BitVector, v: &BitVector) -> Result<BitVector> {
        self.xpart.mul_vec(v)?.xor(&self.zpart.mul_vec(u)?)
    }

    /// Masks of generator `i` in basis-index bit positions.
    pub(crate) fn masks(&self, i: usize) -> (usize, usize) {
        (
            index_mask(&self.xpart.row(i)),
            index_mask(&self.zpart.row(i)),
        )
    }
}

/// Qubit `i` of an `n`-qubit register is index bit `n − 1 − i`.
pub(crate) fn index_mask(bits: &BitVector) -> usize {
    let n = bits.len();
    bits.ones()
        .fold(0usize, |acc, i| acc | (1usize << (n - 1 - i)))
}

/// Which part of a state an `n`-qubit operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Register {
    /// The operator spans the whole state.
    Whole,
    /// High half of a bipartite `A ⊗ B` state.
    A,
    /// Low half of a bipartite state.
    B,
}

impl Register {
    fn offset(self, state_qubits: usize, op_qubits: usize) -> Result<usize> {
        match self {
            Register::Whole if state_qubits == op_qubits => Ok(0),
            Register::A | Register::B if state_qubits == 2 * op_qubits => Ok(match self {
                Register::A => op_qubits,
                _ => 0,
            }),
            _ => Err(Error::DimensionMismatch(format!(
                "{op_qubits}-qubit operator on {state_qubits}-qubit state as {self:?}"
            ))),
        }
    }
}

/// Dense `σ₁^u σ₃^v` on `u.len()` qubits: `|z⟩ ↦ (−1)^{v·z} |z + u⟩`.
pub fn pauli_dense(u: &BitVector, v: &BitVector) -> Result<DMatrix<Complex64>> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(
            "pauli masks differ in length".into(),
        ));
    }
    let n = u.len();
    if n > MAX_BELL_QUBITS {
        return Err(Error::Resource(format!("{n}-qubit dense operator")));
    }
    let (xm, zm) = (index_mask(u), index_mask(v));
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for z in 0..dim {
        let sign = if (zm & z).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        m[(z ^ xm, z)] = Complex64::new(sign, 0.0);
    }
    Ok(m)
}

/// Dense generator `i` of a tuple.
pub fn generator_dense(t: &PauliTuple, i: usize) -> Result<DMatrix<Complex64>> {
    pauli_dense(&t.xpart.row(i), &t.zpart.row(i))
}

/// `P(g, x) = 2^{−m} ∏ⱼ (I + (−1)^{xⱼ} gⱼ)` for an arbitrary list of dense,
/// commuting, self-adjoint generators.
pub fn projector_from_generators(
    gens: &[DMatrix<Complex64>],
    x: &BitVector,
) -> Result<DMatrix<Complex64>> {
    if gens.len() != x.len() || gens.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} generators, outcome of length {}",
            gens.len(),
            x.len()
        )));
    }
    let dim = gens[0].nrows();
    let id = DMatrix::<Complex64>::identity(dim, dim);
    let mut p = id.clone();
    for (j, g) in gens.iter().enumerate() {
        let factor = if x.get(j) { &id - g } else { &id + g };
        p *= factor.scale(0.5);
    }
    Ok(p)
}

/// Dense projector `P(ĝ, x)` onto the joint eigenspace with eigenvalues `(−1)^{xⱼ}`.
pub fn projector(t: &PauliTuple, x: &BitVector) -> Result<DMatrix<Complex64>> {
    let gens = (0..t.m())
        .map(|i| generator_dense(t, i))
        .collect::<Result<Vec<_>>>()?;
    projector_from_generators(&gens, x)
}

/// Apply `P(ĝ, x)` on `reg` of `state` without building dense operators.
pub fn apply_projector(
    state: &DVector<Complex64>,
    n_state: usize,
    t: &PauliTuple,
    x: &BitVector,
    reg: Register,
) -> Result<DVector<Complex64>> {
    if x.len() != t.m() {
        return Err(Error::DimensionMismatch(format!(
            "outcome of length {} for {} generators",
            x.len(),
            t.m()
        )));
    }
    let shift = reg.offset(n_state, t.n())?;
    let mut cur = state.clone();
    let mut next = cur.clone();
    for j in 0..t.m() {
        let (xm, zm) = t.masks(j);
        let (xm, zm) = (xm << shift, zm << shift);
        let eig = if x.get(j) { -1.0 } else { 1.0 };
        // (I + eig·g)/2, with g|z⟩ = (−1)^{zm·z}|z ⊕ xm⟩
        for idx in 0..cur.len() {
            let src = idx ^ xm;
            let sign = if (zm & src).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            next[idx] = (cur[idx] + cur[src] * (eig * sign)) * 0.5;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Outcome `x` with Born probability `⟨ψ|P(ĝ,x)|ψ⟩`, the normalised
/// post-measurement state, and that probability.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcome: BitVector,
    pub post: StateVec,
    pub prob: f64,
}

/// Measure the tuple on a state of the same size.
pub fn measure_tuple<R: Rng + ?Sized>(
    state: &StateVec,
    t: &PauliTuple,
    rng: &mut R,
) -> Result<Measurement> {
    measure_tuple_on(state, t, Register::Whole, rng)
}

/// Outcome probabilities in lexicographic outcome order (entry 0 of `x` is the
/// most significant).
pub fn outcome_distribution(
    state: &StateVec,
    t: &PauliTuple,
    reg: Register,
) -> Result<Vec<(BitVector, f64, DVector<Complex64>)>> {
    let m = t.m();
    let mut out = Vec::with_capacity(1 << m);
    for code in 0..(1u64 << m) {
        let x = lex_outcome(m, code);
        let projected = apply_projector(state.amplitudes(), state.n_qubits(), t, &x, reg)?;
        let p = projected.norm_squared();
        out.push((x, p, projected));
    }
    Ok(out)
}

pub(crate) fn lex_outcome(m: usize, code: u64) -> BitVector {
    let mut x = BitVector::zeros(m);
    for j in 0..m {
        if (code >> (m - 1 - j)) & 1 == 1 {
            x.set(j, true);
        }
    }
    x
}

/// Measure the tuple on register `reg`; branches are scanned in
/// lexicographic outcome order against one uniform draw.
pub fn measure_tuple_on<R: Rng + ?Sized>(
    state: &StateVec,
    t: &PauliTuple,
    reg: Register,
    rng: &mut R,
) -> Result<Measurement> {
    let branches = outcome_distribution(state, t, reg)?;
    let total: f64 = branches.iter().map(|b| b.1).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    let draw: f64 = rng.gen::<f64>();
    let mut cum = 0.0;
    let mut chosen = None;
    for (i, b) in branches.iter().enumerate() {
        if b.1 <= 0.0 {
            continue;
        }
        cum += b.1;
        chosen = Some(i);
        if draw < cum {
            break;
        }
    }
    let i = chosen.ok_or_else(|| Error::Domain("no branch with positive probability".into()))?;
    let (outcome, prob, projected) = branches.into_iter().nth(i).unwrap();
    let post = StateVec::from_unnormalized(state.n_qubits(), projected.unscale(prob.sqrt()));
    Ok(Measurement {
        outcome,
        post,
        prob,
    })
}
