use rand::Rng;

use super::state::{bell_state, BellIndex};
use super::tuple::{measure_tuple_on, PauliTuple, Register};
use crate::error::{Error, Result};
use crate::f2::{BitVector, KeySchedule};

/// Largest block size the statevector protocol run accepts.
pub const MAX_ORACLE_N: usize = 4;

/// The six measured strings of one quantum run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RawRun {
    pub u_a: BitVector,
    pub u_b: BitVector,
    pub v_a: BitVector,
    pub v_b: BitVector,
    pub w_a: BitVector,
    pub w_b: BitVector,
}

/// Measure `L₁σ⃗₃` on A then B (syndromes `u`), then `M₂σ⃗₁` (`v`), then
/// `M₃σ⃗₁` (`w`), each on the post-measurement state of the Bell state `idx`.
///
/// The ancilla-and-CNOT syndrome extraction followed by an X-basis readout is
/// replaced by the equivalent direct projective measurements of the tuples.
pub fn oracle_protocol_run<R: Rng + ?Sized>(
    ks: &KeySchedule,
    idx: &BellIndex,
    rng: &mut R,
) -> Result<RawRun> {
    if ks.n > MAX_ORACLE_N {
        return Err(Error::Resource(format!(
            "statevector run needs n <= {MAX_ORACLE_N}, got {}",
            ks.n
        )));
    }
    if idx.n() != ks.n {
        return Err(Error::DimensionMismatch(format!(
            "Bell label on {} qubits, schedule on {}",
            idx.n(),
            ks.n
        )));
    }
    let syndrome = PauliTuple::z_type(&ks.l1)?;
    let phase = PauliTuple::x_type(&ks.m2)?;
    let key = PauliTuple::x_type(&ks.m3)?;

    let mut state = bell_state(idx)?;
    let mut out = Vec::with_capacity(6);
    for t in [&syndrome, &phase, &key] {
        for reg in [Register::A, Register::B] {
            let m = measure_tuple_on(&state, t, reg, rng)?;
            out.push(m.outcome);
            state = m.post;
        }
    }
    let mut it = out.into_iter();
    let mut next = || it.next().expect("six outcomes");
    Ok(RawRun {
        u_a: next(),
        u_b: next(),
        v_a: next(),
        v_b: next(),
        w_a: next(),
        w_b: next(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    #[test]
    fn zero_label_gives_equal_strings() {
        let mut rng = stream(10);
        for _ in 0..50 {
            let ks = KeySchedule::sample(4, 1, &mut rng).unwrap();
            let run = oracle_protocol_run(&ks, &BellIndex::zero(4), &mut rng).unwrap();
            assert_eq!(run.u_a, run.u_b);
            assert_eq!(run.v_a, run.v_b);
            assert_eq!(run.w_a, run.w_b);
        }
    }

    #[test]
    fn bit_flip_offsets_syndrome() {
        let mut rng = stream(11);
        let alpha: BitVector = "100".parse().unwrap();
        let idx = BellIndex::new(alpha.clone(), BitVector::zeros(3)).unwrap();
        for _ in 0..1000 {
            let ks = KeySchedule::sample(3, 1, &mut rng).unwrap();
            let run = oracle_protocol_run(&ks, &idx, &mut rng).unwrap();
            assert_eq!(
                run.u_b,
                run.u_a.xor(&ks.l1.mul_vec(&alpha).unwrap()).unwrap()
            );
            assert_eq!(run.v_a, run.v_b);
            assert_eq!(run.w_a, run.w_b);
        }
    }

    #[test]
    fn key_string_uniform() {
        let mut rng = stream(12);
        let idx = BellIndex::zero(3);
        let mut counts: HashMap<BitVector, f64> = HashMap::new();
        let trials = 1000;
        for _ in 0..trials {
            let ks = KeySchedule::sample(3, 1, &mut rng).unwrap();
            let run = oracle_protocol_run(&ks, &idx, &mut rng).unwrap();
            *counts.entry(run.w_a).or_default() += 1.0;
        }
        assert_eq!(counts.len(), 2);
        let e = trials as f64 / 2.0;
        let chi2: f64 = counts.values().map(|c| (c - e).powi(2) / e).sum();
        let p = 1.0 - ChiSquared::new(1.0).unwrap().cdf(chi2);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn rejects_large_n() {
        let mut rng = stream(0);
        let ks = KeySchedule::sample(5, 1, &mut rng).unwrap();
        assert!(matches!(
            oracle_protocol_run(&ks, &BellIndex::zero(5), &mut rng),
            Err(Error::Resource(_))
        ));
    }
}
