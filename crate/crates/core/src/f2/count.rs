use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::BitMatrix;
use crate::error::{Error, Result};

/// Number of rank-`k` matrices in GF(2)^{k×n}: ∏_{i=1}^{k} (2ⁿ − 2^{i−1}).
pub fn count_full_rank(k: usize, n: usize) -> Result<BigUint> {
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let two_n = BigUint::one() << n;
    Ok((0..k).fold(BigUint::one(), |acc, i| {
        acc * (&two_n - (BigUint::one() << i))
    }))
}

/// Pr_L(Lx = 0) for a uniformly random full-rank `k×n` matrix and any fixed
/// nonzero x: (2^{n−k} − 1)/(2ⁿ − 1).
pub fn exact_collision_probability(k: usize, n: usize) -> Result<BigRational> {
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let num = (BigUint::one() << (n - k)) - BigUint::one();
    let den = (BigUint::one() << n) - BigUint::one();
    Ok(BigRational::new(num.into(), den.into()))
}

/// Smallest collision probability any family X → Y can achieve:
/// (|X|/|Y| − 1)/(|X| − 1).
pub fn two_universal_lower_bound(x_size: &BigUint, y_size: &BigUint) -> Result<BigRational> {
    if y_size.is_zero() || *x_size <= BigUint::one() {
        return Err(Error::Domain("need |X| >= 2 and |Y| >= 1".into()));
    }
    let x = BigRational::from_integer(x_size.clone().into());
    let y = BigRational::from_integer(y_size.clone().into());
    let one = BigRational::one();
    Ok((&x / &y - &one) / (x - one))
}

/// Every full-rank `k×n` matrix, in order of their packed entry index.
///
/// Exhaustive; restricted to `k·n <= 20`.
pub fn full_rank_matrices(k: usize, n: usize) -> Result<Vec<BitMatrix>> {
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    if k * n > 20 {
        return Err(Error::Resource(format!(
            "enumerating 2^{} matrices is too large",
            k * n
        )));
    }
    let mut out = Vec::new();
    for code in 0u64..(1u64 << (k * n)) {
        let mut m = BitMatrix::zeros(k, n);
        for i in 0..k {
            for j in 0..n {
                if (code >> (i * n + j)) & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        if m.rank() == k {
            out.push(m);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::f2::BitVector;
    use num_bigint::BigInt;
    use std::collections::HashMap;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn full_rank_counts() {
        assert_eq!(count_full_rank(1, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(count_full_rank(2, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(count_full_rank(2, 3).unwrap(), BigUint::from(42u32));
        assert!(count_full_rank(3, 2).is_err());
        // |GL(10,2)| overflows u64
        assert!(count_full_rank(10, 10).unwrap() > BigUint::from(u64::MAX));
    }

    #[test]
    fn counts_match_enumeration() {
        for n in 1..=4 {
            for k in 1..=n {
                let listed = full_rank_matrices(k, n).unwrap().len();
                assert_eq!(BigUint::from(listed), count_full_rank(k, n).unwrap());
            }
        }
    }

    #[test]
    fn collision_probability_examples() {
        assert_eq!(exact_collision_probability(3, 3).unwrap(), ratio(0, 1));
        assert_eq!(exact_collision_probability(1, 2).unwrap(), ratio(1, 3));
        let p = exact_collision_probability(2, 4).unwrap();
        assert_eq!(p, ratio(1, 5));
        assert!(p < ratio(1, 4));
    }

    #[test]
    fn collision_probability_is_optimal() {
        for n in 1..=12 {
            for k in 1..=n {
                let x = BigUint::one() << n;
                let y = BigUint::one() << k;
                assert_eq!(
                    exact_collision_probability(k, n).unwrap(),
                    two_universal_lower_bound(&x, &y).unwrap()
                );
            }
        }
    }

    #[test]
    fn row_submatrix_uniformity() {
        for n in 1..=3 {
            let gl = full_rank_matrices(n, n).unwrap();
            for k in 1..=n {
                let expected = count_full_rank(k, n).unwrap();
                // first k rows, and the last k rows
                for start in [0, n - k] {
                    let mut hist: HashMap<BitMatrix, usize> = HashMap::new();
                    for l in &gl {
                        *hist.entry(l.row_block(start, start + k)).or_default() += 1;
                    }
                    assert_eq!(BigUint::from(hist.len()), expected);
                    let first = *hist.values().next().unwrap();
                    assert!(hist.values().all(|&c| c == first));
                }
            }
        }
    }

    #[test]
    fn two_universality_small() {
        let n = 3;
        for k in 1..=n {
            let all = full_rank_matrices(k, n).unwrap();
            for x in 1u64..8 {
                let xv = BitVector::from_u64(n, x);
                let hits = all
                    .iter()
                    .filter(|l| l.mul_vec(&xv).unwrap().is_zero())
                    .count();
                assert_eq!(
                    ratio(hits as i64, all.len() as i64),
                    exact_collision_probability(k, n).unwrap()
                );
            }
        }
    }
}
