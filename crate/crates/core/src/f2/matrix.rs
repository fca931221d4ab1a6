use std::fmt;

use rand::Rng;

use super::bitvec::dot_words;
use super::{tail_mask, words_for, BitVector, WORD};
use crate::error::{Error, Result};

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stack row vectors; all must share one length.
    pub fn from_rows(rows: &[BitVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVector::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    /// Parse a 0/1 literal such as `&[&[1, 0], &[0, 1]]`-style nested slices.
    pub fn from_bit_rows(rows: &[&[u8]]) -> Result<Self> {
        let vs = rows
            .iter()
            .map(|r| BitVector::from_bits(r))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&vs)
    }

    /// Parse the textual format: one row per line, characters '0'/'1', no
    /// separators. Blank lines are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: BitVector = line.parse().map_err(|e| Error::Parse {
                line: ln + 1,
                msg: format!("{e}"),
            })?;
            if let Some(first) = rows.first().map(BitVector::len) {
                if first != row.len() {
                    return Err(Error::Parse {
                        line: ln + 1,
                        msg: format!("row has {} columns, expected {first}", row.len()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no rows".into(),
            });
        }
        Self::from_rows(&rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for i in 0..self.rows {
            s.push_str(&self.row(i).to_string());
            s.push('\n');
        }
        s
    }

    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols);
        let mask = tail_mask(cols);
        for i in 0..rows {
            let row = m.row_words_mut(i);
            for w in row.iter_mut() {
                *w = rng.gen();
            }
            if let Some(last) = row.last_mut() {
                *last &= mask;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols);
        (self.data[i * self.stride + j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.stride + j / WORD];
        let mask = 1u64 << (j % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(i).to_vec())
    }

    pub fn column(&self, j: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            if self.get(i, j) {
                v.set(i, true);
            }
        }
        v
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> BitMatrix {
        assert!(start <= end && end <= self.rows);
        BitMatrix {
            rows: end - start,
            cols: self.cols,
            stride: self.stride,
            data: self.data[start * self.stride..end * self.stride].to_vec(),
        }
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BitMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = BitVector::zeros(self.rows);
        for i in 0..self.rows {
            if dot_words(self.row_words(i), x.words()) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `xᵀ · self`, returned as a vector of length `cols`.
    pub fn vec_mul(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} times {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        let mut acc = vec![0u64; self.stride];
        for i in x.ones() {
            xor_into(&mut acc, self.row_words(i));
        }
        Ok(BitVector::from_words(self.cols, acc))
    }

    /// `self · other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let start = i * out.stride;
            for j in self.row(i).ones() {
                let src = other.row_words(j);
                xor_into(&mut out.data[start..start + out.stride], src);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        let mut block = [0u64; WORD];
        for bi in 0..words_for(self.rows) {
            for bj in 0..self.stride {
                for (t, slot) in block.iter_mut().enumerate() {
                    let r = bi * WORD + t;
                    *slot = if r < self.rows {
                        self.data[r * self.stride + bj]
                    } else {
                        0
                    };
                }
                transpose64(&mut block);
                for (t, &word) in block.iter().enumerate() {
                    let r = bj * WORD + t;
                    if r < out.rows {
                        out.data[r * out.stride + bi] = word;
                    }
                }
            }
        }
        out
    }

    /// Rank by Gaussian elimination; pivots are the first nonzero entry in
    /// column order.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut pivot_row = vec![0u64; self.stride];
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(p, rank);
            pivot_row.copy_from_slice(m.row_words(rank));
            for r in rank + 1..self.rows {
                if m.get(r, col) {
                    xor_into(m.row_words_mut(r), &pivot_row);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn invert(&self) -> Result<BitMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let s = self.stride;
        let w = 2 * s;
        // each row holds [a | inverse] contiguously
        let mut aug = vec![0u64; n * w];
        for i in 0..n {
            aug[i * w..i * w + s].copy_from_slice(self.row_words(i));
            aug[i * w + s + i / WORD] = 1u64 << (i % WORD);
        }
        if !eliminate(&mut aug, n, w, true) {
            return Err(Error::NotInvertible);
        }
        let mut inv = BitMatrix::zeros(n, n);
        for i in 0..n {
            inv.data[i * s..(i + 1) * s].copy_from_slice(&aug[i * w + s..(i + 1) * w]);
        }
        Ok(inv)
    }

    /// Forward elimination only; cheaper than [`BitMatrix::invert`] when the
    /// inverse is not needed.
    pub fn is_invertible(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let mut a = self.data.clone();
        eliminate(&mut a, self.rows, self.stride, false)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }
}

/// Column block width for table-driven elimination.
const BLOCK: usize = 8;

/// In-place elimination on `n` rows of `w` words whose first `n` columns are
/// square. Columns are processed in blocks of [`BLOCK`]: pivots inside a block
/// are found with ordinary row operations (first nonzero row, in order), then
/// every other row is cleared on the whole block with one lookup into a table
/// of all pivot-row combinations. With `full` the pivot columns end up as the
/// identity (Gauss-Jordan); otherwise only rows below are cleared. Returns
/// `false` at the first column without a pivot.
fn eliminate(m: &mut [u64], n: usize, w: usize, full: bool) -> bool {
    let mut table = vec![0u64; (1 << BLOCK) * w];
    let mut c0 = 0;
    while c0 < n {
        let kb = BLOCK.min(n - c0);
        let wi = c0 / WORD;
        let shift = c0 % WORD;
        // rows at or below c0 are zero left of word `wi`
        for j in 0..kb {
            let col = c0 + j;
            let bit = 1u64 << (col % WORD);
            let mut found = None;
            for p in col..n {
                for i in 0..j {
                    if (m[p * w + wi] >> (shift + i)) & 1 == 1 {
                        xor_rows(m, w, wi, p, c0 + i);
                    }
                }
                if m[p * w + wi] & bit != 0 {
                    found = Some(p);
                    break;
                }
            }
            let Some(p) = found else {
                return false;
            };
            if p != col {
                for t in wi..w {
                    m.swap(p * w + t, col * w + t);
                }
            }
            for i in 0..j {
                if m[(c0 + i) * w + wi] & bit != 0 {
                    xor_rows(m, w, wi, c0 + i, col);
                }
            }
        }
        for mask in 1usize..(1 << kb) {
            let low = mask.trailing_zeros() as usize;
            let (done, rest) = table.split_at_mut(mask * w);
            let prev = &done[(mask & (mask - 1)) * w + wi..(mask & (mask - 1)) * w + w];
            let src = &m[(c0 + low) * w + wi..(c0 + low + 1) * w];
            for ((d, a), b) in rest[wi..w].iter_mut().zip(prev).zip(src) {
                *d = a ^ b;
            }
        }
        let sel = (1u64 << kb) - 1;
        let start = if full { 0 } else { c0 + kb };
        for r in start..n {
            if r >= c0 && r < c0 + kb {
                continue;
            }
            let idx = ((m[r * w + wi] >> shift) & sel) as usize;
            if idx != 0 {
                let row = &mut m[r * w + wi..(r + 1) * w];
                xor_into(row, &table[idx * w + wi..(idx + 1) * w]);
            }
        }
        c0 += kb;
    }
    true
}

/// Row `dst` ^= row `src`, words `from..w`.
#[inline]
fn xor_rows(m: &mut [u64], w: usize, from: usize, dst: usize, src: usize) {
    debug_assert_ne!(dst, src);
    let (d, s) = if dst < src {
        let (lo, hi) = m.split_at_mut(src * w);
        (&mut lo[dst * w + from..(dst + 1) * w], &hi[from..w])
    } else {
        let (lo, hi) = m.split_at_mut(dst * w);
        (&mut hi[from..w], &lo[src * w + from..(src + 1) * w])
    };
    xor_into(d, s);
}

#[inline]
fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// In-place transpose of a 64x64 bit block (row `i` = word `i`, column `j` = bit `j`).
fn transpose64(a: &mut [u64; WORD]) {
    let mut j = 32usize;
    let mut m: u64 = 0x0000_0000_ffff_ffff;
    while j != 0 {
        let mut k = 0usize;
        while k < WORD {
            let t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k + j] ^= t;
            a[k] ^= t << j;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

/// Uniform invertible `n x n` matrix by row-wise rejection: row `i` is drawn
/// uniformly and redrawn while it lies in the span of rows `0..i`. Every
/// invertible matrix is reached with probability `1/|GL(n,2)|`.
pub fn sample_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitMatrix {
    assert!(n >= 1, "matrix size must be positive");
    match words_for(n) {
        1 => sample_rows::<1, R>(n, rng),
        2 => sample_rows::<2, R>(n, rng),
        3 => sample_rows::<3, R>(n, rng),
        4 => sample_rows::<4, R>(n, rng),
        5..=8 => sample_rows::<8, R>(n, rng),
        9..=16 => sample_rows::<16, R>(n, rng),
        _ => sample_rows_dyn(n, rng),
    }
}

// Fixed-width candidate rows let the reduction loop stay in registers; `S`
// may exceed the row stride, the extra words stay zero. Completed groups of
// `BLOCK` basis rows are put in reduced form on their pivots and tabulated,
// so a candidate is reduced by a whole group with one lookup.
fn sample_rows<const S: usize, R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitMatrix {
    let stride = words_for(n);
    let mask = tail_mask(n);
    let mut out = BitMatrix::zeros(n, n);
    // echelon copy of the rows so far; each row is zero at all earlier pivots
    let mut basis: Vec<[u64; S]> = Vec::with_capacity(n);
    let mut pivots: Vec<(usize, u32)> = Vec::with_capacity(n);
    let mut tables: Vec<[u64; S]> = Vec::new();
    for i in 0..n {
        let grouped = pivots.len() / BLOCK;
        loop {
            let mut cand = [0u64; S];
            for w in cand.iter_mut().take(stride) {
                *w = rng.gen();
            }
            cand[stride - 1] &= mask;
            let drawn = cand;
            for g in 0..grouped {
                let mut idx = 0usize;
                for (b, &(wi, sh)) in pivots[g * BLOCK..(g + 1) * BLOCK].iter().enumerate() {
                    idx |= (((cand[wi] >> sh) & 1) as usize) << b;
                }
                let row = &tables[(g << BLOCK) + idx];
                for t in 0..S {
                    cand[t] ^= row[t];
                }
            }
            let tail = grouped * BLOCK;
            for (&(wi, sh), b) in pivots[tail..].iter().zip(&basis[tail..]) {
                let hit = 0u64.wrapping_sub((cand[wi] >> sh) & 1);
                for t in 0..S {
                    cand[t] ^= b[t] & hit;
                }
            }
            if let Some(wi) = cand.iter().position(|&w| w != 0) {
                pivots.push((wi, cand[wi].trailing_zeros()));
                basis.push(cand);
                out.row_words_mut(i).copy_from_slice(&drawn[..stride]);
                break;
            }
        }
        if pivots.len().is_multiple_of(BLOCK) {
            let g = pivots.len() / BLOCK - 1;
            let rows = &mut basis[g * BLOCK..];
            // clear each pivot from the group's earlier rows
            for j in 1..BLOCK {
                let (wi, sh) = pivots[g * BLOCK + j];
                let src = rows[j];
                for row in rows[..j].iter_mut() {
                    let hit = 0u64.wrapping_sub((row[wi] >> sh) & 1);
                    for t in 0..S {
                        row[t] ^= src[t] & hit;
                    }
                }
            }
            tables.push([0u64; S]);
            for m in 1usize..(1 << BLOCK) {
                let prev = tables[(g << BLOCK) + (m & (m - 1))];
                let src = rows[m.trailing_zeros() as usize];
                let mut e = [0u64; S];
                for t in 0..S {
                    e[t] = prev[t] ^ src[t];
                }
                tables.push(e);
            }
        }
    }
    out
}

fn sample_rows_dyn<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitMatrix {
    let s = words_for(n);
    let mask = tail_mask(n);
    let mut out = BitMatrix::zeros(n, n);
    let mut basis = vec![0u64; n * s];
    let mut pivots: Vec<usize> = Vec::with_capacity(n);
    let mut cand = vec![0u64; s];
    for i in 0..n {
        loop {
            let row = out.row_words_mut(i);
            for w in row.iter_mut() {
                *w = rng.gen();
            }
            row[s - 1] &= mask;
            cand.copy_from_slice(row);
            for (j, &pc) in pivots.iter().enumerate() {
                if (cand[pc / WORD] >> (pc % WORD)) & 1 == 1 {
                    xor_into(&mut cand, &basis[j * s..(j + 1) * s]);
                }
            }
            if let Some(wi) = cand.iter().position(|&w| w != 0) {
                pivots.push(wi * WORD + cand[wi].trailing_zeros() as usize);
                basis[i * s..(i + 1) * s].copy_from_slice(&cand);
                break;
            }
        }
    }
    out
}

/// As [`sample_invertible`], also returning the inverse.
pub(crate) fn sample_invertible_with_inverse<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> (BitMatrix, BitMatrix) {
    let m = sample_invertible(n, rng);
    let inv = m.invert().expect("sampled matrix is invertible");
    (m, inv)
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", self.row(i))?;
        }
        write!(f, "]")
    }
}
