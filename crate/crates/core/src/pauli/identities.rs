//! Numerical checks of the stabilizer identities the protocol relies on.
//!
//! Each `*_deviation` returns the largest Frobenius-norm residual over the
//! instance (an upper bound on the operator-norm residual).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::state::{basis_index, bell_state, BellIndex};
use super::tuple::{
    apply_projector, generator_dense, lex_outcome, pauli_dense, projector,
    projector_from_generators, PauliTuple, Register,
};
use crate::error::{Error, Result};
use crate::f2::{BitMatrix, BitVector};
use crate::hashball::BallSpec;

type Op = DMatrix<Complex64>;

/// Random Y-free Pauli `σ₁^u σ₃^v` label with disjoint supports.
pub fn random_y_free_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (BitVector, BitVector) {
    let mut u = BitVector::zeros(n);
    let mut v = BitVector::zeros(n);
    for i in 0..n {
        match rng.gen_range(0..3) {
            1 => u.set(i, true),
            2 => v.set(i, true),
            _ => {}
        }
    }
    (u, v)
}

/// Random valid tuple on `n` qubits with between 1 and `n` generators.
pub fn random_tuple<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliTuple {
    let target = rng.gen_range(1..=n);
    let mut xs: Vec<BitVector> = Vec::new();
    let mut zs: Vec<BitVector> = Vec::new();
    let mut attempts = 0;
    while xs.len() < target && attempts < 500 {
        attempts += 1;
        let (u, v) = random_y_free_pauli(n, rng);
        if u.is_zero() && v.is_zero() {
            continue;
        }
        let commutes = xs.iter().zip(&zs).all(|(x, z)| {
            let a = x.dot(&v).unwrap();
            let b = z.dot(&u).unwrap();
            a == b
        });
        if !commutes {
            continue;
        }
        let mut cx = xs.clone();
        let mut cz = zs.clone();
        cx.push(u);
        cz.push(v);
        let cand = PauliTuple::new(
            BitMatrix::from_rows(&cx).unwrap(),
            BitMatrix::from_rows(&cz).unwrap(),
        );
        if cand.is_ok() {
            xs = cx;
            zs = cz;
        }
    }
    if xs.is_empty() {
        // σ₃ on qubit 0 is always a valid one-element tuple
        let mut z = BitVector::zeros(n);
        z.set(0, true);
        xs.push(BitVector::zeros(n));
        zs.push(z);
    }
    PauliTuple::new(
        BitMatrix::from_rows(&xs).unwrap(),
        BitMatrix::from_rows(&zs).unwrap(),
    )
    .expect("accepted generators form a valid tuple")
}

/// Uniform full-rank `k × m` matrix by rejection.
pub fn random_full_rank<R: Rng + ?Sized>(k: usize, m: usize, rng: &mut R) -> BitMatrix {
    assert!(1 <= k && k <= m);
    loop {
        let l = BitMatrix::random(k, m, rng);
        if l.rank() == k {
            return l;
        }
    }
}

fn all_outcomes(m: usize) -> impl Iterator<Item = BitVector> {
    (0..(1u64 << m)).map(move |c| lex_outcome(m, c))
}

/// `max_x ‖P(ĝ,x)·h − h·P(ĝ, x + ℱ(ĝ)𝒮ℱ(h)ᵀ)‖` for `h = σ₁^u σ₃^v`.
pub fn pauli_shift_deviation(t: &PauliTuple, u: &BitVector, v: &BitVector) -> Result<f64> {
    let h = pauli_dense(u, v)?;
    let shift = t.shift(u, v)?;
    let mut worst: f64 = 0.0;
    for x in all_outcomes(t.m()) {
        let lhs = projector(t, &x)? * &h;
        let rhs = &h * projector(t, &x.xor(&shift)?)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `max_y ‖P(Lĝ, y) − Σ_{x: Lx=y} P(ĝ, x)‖`; the generators of `Lĝ` are the
/// operator products `∏ⱼ gⱼ^{L_ij}`, phases included.
pub fn combination_deviation(t: &PauliTuple, l: &BitMatrix) -> Result<f64> {
    if l.cols() != t.m() {
        return Err(Error::DimensionMismatch(format!(
            "L has {} columns for {} generators",
            l.cols(),
            t.m()
        )));
    }
    let dim = 1usize << t.n();
    let gens = (0..t.m())
        .map(|j| generator_dense(t, j))
        .collect::<Result<Vec<_>>>()?;
    let combined: Vec<Op> = (0..l.rows())
        .map(|i| {
            (0..t.m())
                .filter(|&j| l.get(i, j))
                .fold(Op::identity(dim, dim), |acc, j| acc * &gens[j])
        })
        .collect();
    let singles = all_outcomes(t.m())
        .map(|x| Ok((l.mul_vec(&x)?, projector(t, &x)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for y in all_outcomes(l.rows()) {
        let lhs = projector_from_generators(&combined, &y)?;
        let rhs = singles
            .iter()
            .filter(|(ly, _)| *ly == y)
            .fold(Op::zeros(dim, dim), |acc, (_, p)| acc + p);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

fn bell_outer(idx: &BellIndex) -> Result<Op> {
    let s = bell_state(idx)?;
    Ok(s.amplitudes() * s.amplitudes().adjoint())
}

fn hadamard_all(qubits: usize) -> Op {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h1 = DMatrix::from_row_slice(2, 2, &[s, s, s, -s].map(|v| Complex64::new(v, 0.0)));
    (1..qubits).fold(h1.clone(), |acc, _| acc.kronecker(&h1))
}

/// Both partial Bell sums: over phase labels they give the computational
/// projector `Σ_z |z, z+α⟩⟨z, z+α|`; over bit labels, its Hadamard conjugate.
pub fn partial_bell_sum_deviation(alpha: &BitVector, beta: &BitVector) -> Result<f64> {
    let n = alpha.len();
    if beta.len() != n {
        return Err(Error::DimensionMismatch(
            "alpha and beta lengths differ".into(),
        ));
    }
    let dim = 1usize << n;
    let labels = || (0..dim as u64).map(move |c| BitVector::from_u64(n, c));

    let mut sum_beta = Op::zeros(dim * dim, dim * dim);
    for b in labels() {
        sum_beta += bell_outer(&BellIndex::new(alpha.clone(), b)?)?;
    }
    let a = basis_index(alpha);
    let mut comp_alpha = Op::zeros(dim * dim, dim * dim);
    for z in 0..dim {
        let i = (z << n) | (z ^ a);
        comp_alpha[(i, i)] = Complex64::new(1.0, 0.0);
    }

    let mut sum_alpha = Op::zeros(dim * dim, dim * dim);
    for a2 in labels() {
        sum_alpha += bell_outer(&BellIndex::new(a2, beta.clone())?)?;
    }
    let b = basis_index(beta);
    let mut comp_beta = Op::zeros(dim * dim, dim * dim);
    for x in 0..dim {
        let i = (x << n) | (x ^ b);
        comp_beta[(i, i)] = Complex64::new(1.0, 0.0);
    }
    let h = hadamard_all(2 * n);
    let comp_beta = &h * comp_beta * &h;

    Ok((sum_beta - comp_alpha)
        .norm()
        .max((sum_alpha - comp_beta).norm()))
}

/// For the maximally entangled state: `|⟨ψ|I⊗M|ψ⟩ − 2^{−n}Tr M|` and
/// `‖(M⊗I)|ψ⟩ − (I⊗Mᵀ)|ψ⟩‖`, whichever is larger.
pub fn max_entangled_deviation(m: &Op) -> Result<f64> {
    let dim = m.nrows();
    if !dim.is_power_of_two() || m.ncols() != dim {
        return Err(Error::DimensionMismatch("M must be 2^n x 2^n".into()));
    }
    let n = dim.trailing_zeros() as usize;
    let psi = bell_state(&BellIndex::zero(n))?;
    let psi = psi.amplitudes();
    let id = Op::identity(dim, dim);
    let expect = psi.dotc(&(id.kronecker(m) * psi));
    let trace = m.trace() / dim as f64;
    let left = m.kronecker(&id) * psi;
    let right = id.kronecker(&m.transpose()) * psi;
    Ok((expect - trace).norm().max((left - right).norm()))
}

/// Largest residual of `(P(ĝ,x)⊗P(ĝ,y))|ψ_αβ⟩ = 𝟙[x = y + ℱ(ĝ)𝒮(α;β)]·(P(ĝ,x)⊗I)|ψ_αβ⟩`
/// over all outcome pairs.
pub fn bell_action_deviation(t: &PauliTuple, idx: &BellIndex) -> Result<f64> {
    if t.n() != idx.n() {
        return Err(Error::DimensionMismatch(format!(
            "tuple on {} qubits, Bell label on {}",
            t.n(),
            idx.n()
        )));
    }
    if t.n() > 5 {
        return Err(Error::Resource("bell action check needs n <= 5".into()));
    }
    let psi = bell_state(idx)?;
    let nq = psi.n_qubits();
    let shift = t.shift(&idx.alpha, &idx.beta)?;
    let zero = DVector::<Complex64>::zeros(psi.amplitudes().len());
    let mut worst: f64 = 0.0;
    for x in all_outcomes(t.m()) {
        let on_a = apply_projector(psi.amplitudes(), nq, t, &x, Register::A)?;
        for y in all_outcomes(t.m()) {
            let both = apply_projector(&on_a, nq, t, &y, Register::B)?;
            let expected = if x == y.xor(&shift)? { &on_a } else { &zero };
            worst = worst.max((both - expected).norm());
        }
    }
    Ok(worst)
}

/// Whether the Bell-basis action identity holds for every outcome pair to 1e-9.
pub fn check_bell_action(t: &PauliTuple, idx: &BellIndex) -> Result<bool> {
    Ok(bell_action_deviation(t, idx)? < 1e-9)
}

/// For the Bell-diagonal state `ρ = Σ p(α,β)|ψ_αβ⟩⟨ψ_αβ|`, returns
/// `(Σ_{α,β ∈ ball} p, Tr(Π ρ Π))` where `Π` projects onto Bell states with
/// at most `r` bit flips and at most `r` phase flips.
pub fn accept_projection_weight(dist: &[(BellIndex, f64)], spec: BallSpec) -> Result<(f64, f64)> {
    let n = spec.n;
    if n > 3 {
        return Err(Error::Resource(
            "dense acceptance projector needs n <= 3".into(),
        ));
    }
    let dim = 1usize << (2 * n);
    let mut rho = Op::zeros(dim, dim);
    let mut direct = 0.0;
    for (idx, p) in dist {
        if idx.n() != n {
            return Err(Error::DimensionMismatch("Bell label size".into()));
        }
        rho += bell_outer(idx)?.scale(*p);
        if spec.contains(&idx.alpha) && spec.contains(&idx.beta) {
            direct += p;
        }
    }
    let mut pi = Op::zeros(dim, dim);
    let labels: Vec<BitVector> = (0..(1u64 << n))
        .map(|c| BitVector::from_u64(n, c))
        .collect();
    for a in labels.iter().filter(|a| spec.contains(a)) {
        for b in labels.iter().filter(|b| spec.contains(b)) {
            pi += bell_outer(&BellIndex::new(a.clone(), b.clone())?)?;
        }
    }
    let traced = (&pi * rho * &pi).trace().re;
    Ok((direct, traced))
}
