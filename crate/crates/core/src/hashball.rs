//! Binary entropy, Hamming balls around zero, and the membership functions
//! `f` (sees the error string) and `g` (sees only its syndrome).
//!
//! Ball elements are enumerated by increasing Hamming weight; within a weight
//! class, by increasing integer value `Σ sᵢ 2ⁱ`. So `g` is a bounded-distance
//! decoder that prefers low-weight explanations, and `g(H, 0)` is always the
//! zero vector.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2::{BitMatrix, BitVector};

/// `g_ball` refuses balls with more elements than this.
pub const BALL_LIMIT: u64 = 1 << 32;

/// −p·log₂p − (1−p)·log₂(1−p), with h(0) = h(1) = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "entropy argument {p} outside [0, 1]"
        )));
    }
    Ok(entropy_unchecked(p))
}

/// [`binary_entropy`] without the domain check, for inner loops whose
/// arguments are already known to lie in `[0, 1]`.
#[inline]
pub fn entropy_unchecked(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallSpec {
    pub n: usize,
    pub r: usize,
}

impl BallSpec {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n == 0 || 2 * r > n {
            return Err(Error::InvalidParams(format!(
                "ball needs n >= 1 and 2r <= n, got n={n}, r={r}"
            )));
        }
        Ok(Self { n, r })
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.n && v.weight() <= self.r
    }
}

/// Σ_{i=0}^{r} C(n, i).
pub fn ball_size(spec: BallSpec) -> BigUint {
    let mut term = BigUint::one();
    let mut total = BigUint::one();
    for i in 1..=spec.r {
        term = term * BigUint::from(spec.n - i + 1) / BigUint::from(i);
        total += &term;
    }
    total
}

/// Enumerates B_n(0, r): by weight, then by integer value within a weight.
pub struct BallIter {
    n: usize,
    r: usize,
    // support of the next element, ascending; None once exhausted
    support: Option<Vec<usize>>,
}

impl BallIter {
    pub fn new(spec: BallSpec) -> Self {
        Self {
            n: spec.n,
            r: spec.r,
            support: Some(Vec::new()),
        }
    }

    fn advance(&mut self) {
        let Some(c) = self.support.as_mut() else {
            return;
        };
        let w = c.len();
        // colex successor: bump the lowest index that has room above it
        for j in 0..w {
            let limit = if j + 1 < w { c[j + 1] } else { self.n };
            if c[j] + 1 < limit {
                c[j] += 1;
                for (t, slot) in c.iter_mut().take(j).enumerate() {
                    *slot = t;
                }
                return;
            }
        }
        if w < self.r && w < self.n {
            *c = (0..=w).collect();
        } else {
            self.support = None;
        }
    }
}

impl Iterator for BallIter {
    type Item = BitVector;

    fn next(&mut self) -> Option<BitVector> {
        let c = self.support.as_ref()?;
        let v = BitVector::from_support(self.n, c);
        self.advance();
        Some(v)
    }
}

pub fn ball_iter(spec: BallSpec) -> BallIter {
    BallIter::new(spec)
}

/// A ball element, or ⊥.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DecodeResult {
    Pattern(BitVector),
    Bottom,
}

impl DecodeResult {
    pub fn pattern(&self) -> Option<&BitVector> {
        match self {
            DecodeResult::Pattern(p) => Some(p),
            DecodeResult::Bottom => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, DecodeResult::Bottom)
    }
}

/// α if α is in the ball, else ⊥.
pub fn f_ball(alpha: &BitVector, spec: BallSpec) -> Result<DecodeResult> {
    if alpha.len() != spec.n {
        return Err(Error::DimensionMismatch(format!(
            "pattern length {} vs ball dimension {}",
            alpha.len(),
            spec.n
        )));
    }
    Ok(if alpha.weight() <= spec.r {
        DecodeResult::Pattern(alpha.clone())
    } else {
        DecodeResult::Bottom
    })
}

/// First ball element `s` (in [`BallIter`] order) with `H·s = y`, else ⊥.
pub fn g_ball(h: &BitMatrix, y: &BitVector, spec: BallSpec) -> Result<DecodeResult> {
    SyndromeDecoder::new(h, spec)?.decode(y)
}

/// Brute-force ball decoder for a fixed parity-check matrix.
///
/// Column syndromes are precomputed so each candidate costs one XOR.
pub struct SyndromeDecoder {
    spec: BallSpec,
    k: usize,
    sw: usize,
    columns: Vec<u64>,
}

impl SyndromeDecoder {
    pub fn new(h: &BitMatrix, spec: BallSpec) -> Result<Self> {
        if h.cols() != spec.n {
            return Err(Error::DimensionMismatch(format!(
                "hash has {} columns, ball dimension is {}",
                h.cols(),
                spec.n
            )));
        }
        let size = ball_size(spec);
        if size > BigUint::from(BALL_LIMIT) {
            return Err(Error::BallTooLarge {
                size: size.to_string(),
                limit: BALL_LIMIT,
            });
        }
        let ht = h.transpose();
        let sw = h.rows().div_ceil(64).max(1);
        let mut columns = vec![0u64; spec.n * sw];
        for j in 0..spec.n {
            let words = ht.row_words(j);
            columns[j * sw..j * sw + words.len()].copy_from_slice(words);
        }
        Ok(Self {
            spec,
            k: h.rows(),
            sw,
            columns,
        })
    }

    pub fn decode(&self, y: &BitVector) -> Result<DecodeResult> {
        if y.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "syndrome length {} vs hash output {}",
                y.len(),
                self.k
            )));
        }
        let mut target = vec![0u64; self.sw];
        target[..y.words().len()].copy_from_slice(y.words());
        if target.iter().all(|&w| w == 0) {
            return Ok(DecodeResult::Pattern(BitVector::zeros(self.spec.n)));
        }
        let mut support = Vec::with_capacity(self.spec.r);
        let mut acc = vec![0u64; self.sw * (self.spec.r + 1)];
        for w in 1..=self.spec.r {
            support.clear();
            support.resize(w, 0);
            acc[(w - 1) * self.sw..w * self.sw].fill(0);
            if self.search(w, self.spec.n, &target, &mut acc, &mut support) {
                return Ok(DecodeResult::Pattern(BitVector::from_support(
                    self.spec.n,
                    &support,
                )));
            }
        }
        Ok(DecodeResult::Bottom)
    }

    #[inline]
    fn column(&self, j: usize) -> &[u64] {
        &self.columns[j * self.sw..(j + 1) * self.sw]
    }

    // Slot `remaining - 1` of `acc` holds the XOR of the columns chosen so
    // far. Picks support[remaining - 1] from [remaining - 1, upper) ascending;
    // fixing the largest index first yields increasing integer order.
    fn search(
        &self,
        remaining: usize,
        upper: usize,
        target: &[u64],
        acc: &mut [u64],
        support: &mut [usize],
    ) -> bool {
        let sw = self.sw;
        let level = remaining - 1;
        if level == 0 {
            let base = &acc[..sw];
            for c in 0..upper {
                let col = self.column(c);
                if (0..sw).all(|t| base[t] ^ col[t] == target[t]) {
                    support[0] = c;
                    return true;
                }
            }
            return false;
        }
        for c in level..upper {
            let (lower, here) = acc.split_at_mut(level * sw);
            let col = self.column(c);
            let next = &mut lower[(level - 1) * sw..];
            for t in 0..sw {
                next[t] = here[t] ^ col[t];
            }
            support[level] = c;
            if self.search(remaining - 1, c, target, acc, support) {
                return true;
            }
        }
        false
    }
}

/// Ball size as `f64` (may be `inf` for huge balls).
pub fn ball_size_f64(spec: BallSpec) -> f64 {
    ball_size(spec).to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::full_rank_matrices;
    use crate::rng::stream;
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// Brute-force g: walk the ball iterator and test each element.
    fn g_by_iteration(h: &BitMatrix, y: &BitVector, spec: BallSpec) -> DecodeResult {
        ball_iter(spec)
            .find(|s| &h.mul_vec(s).unwrap() == y)
            .map_or(DecodeResult::Bottom, DecodeResult::Pattern)
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        // -0.0451 log2 0.0451 - 0.9549 log2 0.9549, 30-digit reference: 0.265205616583858...
        assert!((binary_entropy(0.0451).unwrap() - 0.265205616583859).abs() < 1e-12);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(ball_size(BallSpec::new(7, 0).unwrap()), BigUint::from(1u32));
        assert_eq!(ball_size(BallSpec::new(4, 1).unwrap()), BigUint::from(5u32));
        let s = BallSpec::new(10, 2).unwrap();
        assert_eq!(ball_size(s), BigUint::from(56u32));
        let bound = 2f64.powf(10.0 * binary_entropy(0.2).unwrap());
        assert!((bound - 149.1).abs() < 0.1);
        assert!(56.0 < bound);
    }

    #[test]
    fn ball_spec_rejects_large_radius() {
        assert!(BallSpec::new(4, 3).is_err());
        assert!(BallSpec::new(0, 0).is_err());
    }

    #[test]
    fn iteration_order_n3_r1() {
        let supports: Vec<Vec<usize>> = ball_iter(BallSpec::new(3, 1).unwrap())
            .map(|v| v.ones().collect())
            .collect();
        assert_eq!(supports, vec![vec![], vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn iteration_order_weight_then_value() {
        let spec = BallSpec::new(4, 2).unwrap();
        let items: Vec<BitVector> = ball_iter(spec).collect();
        assert_eq!(items.len(), 11);
        let set: HashSet<_> = items.iter().cloned().collect();
        assert_eq!(set.len(), 11);
        assert!(items.iter().all(|v| v.weight() <= 2));
        let keys: Vec<(usize, u64)> = items.iter().map(|v| (v.weight(), v.to_u64())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn iteration_count_matches_size() {
        for n in 1..=12 {
            for r in 0..=n / 2 {
                let spec = BallSpec::new(n, r).unwrap();
                assert_eq!(BigUint::from(ball_iter(spec).count()), ball_size(spec));
            }
        }
    }

    #[test]
    fn f_examples() {
        let spec = BallSpec::new(6, 2).unwrap();
        let zero = BitVector::zeros(6);
        assert_eq!(f_ball(&zero, spec).unwrap(), DecodeResult::Pattern(zero));
        let w2: BitVector = "100100".parse().unwrap();
        assert_eq!(f_ball(&w2, spec).unwrap(), DecodeResult::Pattern(w2));
        let w3: BitVector = "101100".parse().unwrap();
        assert_eq!(f_ball(&w3, spec).unwrap(), DecodeResult::Bottom);
        assert!(f_ball(&BitVector::zeros(5), spec).is_err());
    }

    #[test]
    fn g_identity_hash_equals_f() {
        let spec = BallSpec::new(4, 1).unwrap();
        let h = BitMatrix::identity(4);
        for y in 0u64..16 {
            let yv = BitVector::from_u64(4, y);
            assert_eq!(g_ball(&h, &yv, spec).unwrap(), f_ball(&yv, spec).unwrap());
        }
    }

    #[test]
    fn g_zero_syndrome_is_zero() {
        let mut rng = stream(8);
        let spec = BallSpec::new(10, 3).unwrap();
        for _ in 0..20 {
            let h = BitMatrix::random(4, 10, &mut rng);
            assert_eq!(
                g_ball(&h, &BitVector::zeros(4), spec).unwrap(),
                DecodeResult::Pattern(BitVector::zeros(10))
            );
        }
    }

    #[test]
    fn g_small_example() {
        let h = BitMatrix::from_bit_rows(&[&[1, 1, 0, 0], &[0, 0, 1, 1]]).unwrap();
        let y: BitVector = "10".parse().unwrap();
        let spec = BallSpec::new(4, 1).unwrap();
        // candidates with syndrome (1,0): e0 and e1; e0 comes first
        let brute = g_by_iteration(&h, &y, spec);
        assert_eq!(brute, DecodeResult::Pattern("1000".parse().unwrap()));
        assert_eq!(g_ball(&h, &y, spec).unwrap(), brute);
    }

    #[test]
    fn g_dimension_errors() {
        let spec = BallSpec::new(4, 1).unwrap();
        let h = BitMatrix::zeros(2, 5);
        assert!(g_ball(&h, &BitVector::zeros(2), spec).is_err());
        let h = BitMatrix::zeros(2, 4);
        assert!(g_ball(&h, &BitVector::zeros(3), spec).is_err());
    }

    #[test]
    fn g_refuses_huge_ball() {
        let spec = BallSpec::new(256, 8).unwrap();
        let h = BitMatrix::zeros(100, 256);
        assert!(matches!(
            g_ball(&h, &BitVector::zeros(100), spec),
            Err(Error::BallTooLarge { .. })
        ));
    }

    #[test]
    fn correct_decode_without_competitor() {
        let mut rng = stream(21);
        let spec = BallSpec::new(12, 2).unwrap();
        for _ in 0..100 {
            let h = BitMatrix::random(8, 12, &mut rng);
            for alpha in ball_iter(spec) {
                let y = h.mul_vec(&alpha).unwrap();
                let competitors = ball_iter(spec)
                    .filter(|s| s != &alpha && h.mul_vec(s).unwrap() == y)
                    .count();
                if competitors == 0 {
                    assert_eq!(g_ball(&h, &y, spec).unwrap(), DecodeResult::Pattern(alpha));
                }
            }
        }
    }

    #[test]
    fn ball_smaller_than_entropy_bound() {
        for n in 2..=64usize {
            for r in 1..=n / 2 {
                let spec = BallSpec::new(n, r).unwrap();
                let h = binary_entropy(r as f64 / n as f64).unwrap();
                assert!(ball_size_f64(spec) < 2f64.powf(n as f64 * h), "n={n} r={r}");
            }
        }
    }

    #[test]
    fn collision_instance_n4_k3_r1() {
        let spec = BallSpec::new(4, 1).unwrap();
        let all = full_rank_matrices(3, 4).unwrap();
        assert_eq!(all.len(), 2520);
        let mut failures = 0usize;
        for h in &all {
            let dec = SyndromeDecoder::new(h, spec).unwrap();
            for a in 0u64..16 {
                let alpha = BitVector::from_u64(4, a);
                let y = h.mul_vec(&alpha).unwrap();
                if dec.decode(&y).unwrap() != f_ball(&alpha, spec).unwrap() {
                    failures += 1;
                }
            }
        }
        let frac = failures as f64 / (2520.0 * 16.0);
        // per-alpha bound: collision probability 1/15 times |ball| = 5
        assert!(frac <= 5.0 / 15.0);
        let entropy_bound = 2f64.powf(-3.0 + 4.0 * binary_entropy(0.25).unwrap());
        assert!(frac < entropy_bound);
    }

    proptest! {
        #[test]
        fn entropy_symmetric(p in 0.0f64..=1.0) {
            let a = binary_entropy(p).unwrap();
            let b = binary_entropy(1.0 - p).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn entropy_monotone_below_half(p in 0.0f64..0.5, q in 0.0f64..0.5) {
            let (lo, hi) = if p < q { (p, q) } else { (q, p) };
            prop_assert!(binary_entropy(lo).unwrap() <= binary_entropy(hi).unwrap() + 1e-15);
        }

        #[test]
        fn decoder_matches_iteration(n in 2usize..14, k in 1usize..14, seed: u64, y_seed: u64) {
            let r = (seed as usize % (n / 2 + 1)).min(n / 2);
            let spec = BallSpec::new(n, r).unwrap();
            let mut rng = stream(seed);
            let h = BitMatrix::random(k, n, &mut rng);
            let y = BitVector::random(k, &mut stream(y_seed));
            prop_assert_eq!(g_ball(&h, &y, spec).unwrap(), g_by_iteration(&h, &y, spec));
        }
    }
}
