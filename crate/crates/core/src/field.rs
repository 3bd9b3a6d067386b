//! Dense linear algebra over prime fields F_p.
//!
//! Matrices are row-major with entries reduced into `0..p`. Elimination is
//! deterministic: pivots are the leftmost nonzero entries, rows are scanned top
//! to bottom, so `rref`, `solve` and `kernel_basis` return canonical answers.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Check that `p` is prime and small enough for `u64` products.
pub fn check_prime(p: u32) -> Result<()> {
    if p < 2 || p > 65_521 {
        return Err(Error::Field(format!("characteristic {p} is not a supported prime")));
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return Err(Error::Field(format!("characteristic {p} is not prime")));
        }
        d += 1;
    }
    Ok(())
}

/// Reduce a signed integer into `0..p`.
pub fn reduce(p: u32, x: i64) -> u32 {
    x.rem_euclid(p as i64) as u32
}

pub fn inv(p: u32, a: u32) -> u32 {
    debug_assert!(a % p != 0);
    // Fermat: a^(p-2)
    pow(p, a, p - 2)
}

pub fn pow(p: u32, a: u32, mut e: u32) -> u32 {
    let (pp, mut base, mut acc) = (p as u64, a as u64 % p as u64, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % pp;
        }
        base = base * base % pp;
        e >>= 1;
    }
    acc as u32
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over F_{}", self.rows, self.cols, self.p)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Matrix {
        Matrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Matrix {
        let mut m = Matrix::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % p;
        }
        m
    }

    pub fn scalar(p: u32, n: usize, c: i64) -> Matrix {
        let mut m = Matrix::zeros(p, n, n);
        let c = reduce(p, c);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn from_vec(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        let data = data.into_iter().map(|x| x % p).collect();
        Matrix { p, rows, cols, data }
    }

    /// Build from signed integer rows; all rows must have length `cols`.
    pub fn from_rows(p: u32, rows: usize, cols: usize, entries: &[Vec<i64>]) -> Result<Matrix> {
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape(format!("expected a {rows}x{cols} matrix")));
        }
        let data = entries.iter().flat_map(|r| r.iter().map(|&x| reduce(p, x))).collect();
        Ok(Matrix { p, rows, cols, data })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(p: u32, rows: usize, cols: &[Vec<u32>]) -> Matrix {
        let mut m = Matrix::zeros(p, rows, cols.len());
        for (c, v) in cols.iter().enumerate() {
            assert_eq!(v.len(), rows, "column length");
            for (r, &x) in v.iter().enumerate() {
                m.data[r * m.cols + c] = x % p;
            }
        }
        m
    }

    pub fn column_vector(p: u32, v: &[u32]) -> Matrix {
        Matrix::from_vec(p, v.len(), 1, v.to_vec())
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: u32) {
        let i = r * self.cols + c;
        self.data[i] = ((self.data[i] as u64 + v as u64) % self.p as u64) as u32;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Matrix::identity(self.p, self.rows)
    }

    fn same_field(&self, other: &Matrix) {
        assert_eq!(self.p, other.p, "matrices over different fields");
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        self.same_field(other);
        assert_eq!(self.cols, other.rows, "matrix product shape {:?} * {:?}", self.shape(), other.shape());
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut acc = vec![0u64; m];
        let mut out = Matrix::zeros(self.p, n, m);
        let pp = self.p as u64;
        // Accumulate unreduced products; reduce every `chunk` additions.
        let chunk = (u64::MAX / ((pp - 1) * (pp - 1)).max(1)).min(1 << 20) as usize;
        for i in 0..n {
            acc.iter_mut().for_each(|a| *a = 0);
            let mut pending = 0usize;
            for t in 0..k {
                let a = self.data[i * k + t] as u64;
                if a == 0 {
                    continue;
                }
                let orow = &other.data[t * m..(t + 1) * m];
                for (slot, &b) in acc.iter_mut().zip(orow) {
                    *slot += a * b as u64;
                }
                pending += 1;
                if pending >= chunk {
                    acc.iter_mut().for_each(|a| *a %= pp);
                    pending = 0;
                }
            }
            for (j, a) in acc.iter().enumerate() {
                out.data[i * m + j] = (a % pp) as u32;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len());
        let pp = self.p as u64;
        (0..self.rows)
            .map(|r| {
                let s: u64 = self.row(r).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64 % pp).sum();
                (s % pp) as u32
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.same_field(other);
        assert_eq!(self.shape(), other.shape(), "matrix sum shape");
        let p = self.p;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| (a + b) % p).collect();
        Matrix { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Matrix {
        let p = self.p;
        let data = self.data.iter().map(|&a| (p - a) % p).collect();
        Matrix { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: i64) -> Matrix {
        let p = self.p;
        let c = reduce(p, c) as u64;
        let data = self.data.iter().map(|&a| (a as u64 * c % p as u64) as u32).collect();
        Matrix { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    /// Horizontal concatenation; all blocks must have `rows` rows.
    pub fn hstack(p: u32, rows: usize, blocks: &[&Matrix]) -> Matrix {
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(p, rows, cols);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, rows, "hstack row mismatch");
            out.set_block(0, off, b);
            off += b.cols;
        }
        out
    }

    /// Vertical concatenation; all blocks must have `cols` columns.
    pub fn vstack(p: u32, cols: usize, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack column mismatch");
            data.extend_from_slice(&b.data);
        }
        Matrix { p, rows, cols, data }
    }

    pub fn block_diag(p: u32, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(p, rows, cols);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        for r in 0..b.rows {
            let dst = (r0 + r) * self.cols + c0;
            self.data[dst..dst + b.cols].copy_from_slice(&b.data[r * b.cols..(r + 1) * b.cols]);
        }
    }

    pub fn add_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of range");
        let p = self.p;
        for r in 0..b.rows {
            for c in 0..b.cols {
                let i = (r0 + r) * self.cols + c0 + c;
                self.data[i] = (self.data[i] + b.data[r * b.cols + c]) % p;
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut out = Matrix::zeros(self.p, rows, cols);
        for r in 0..rows {
            let src = (r0 + r) * self.cols + c0;
            out.data[r * cols..(r + 1) * cols].copy_from_slice(&self.data[src..src + cols]);
        }
        out
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.p, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + j] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix { p: self.p, rows: rows.len(), cols: self.cols, data }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        self.same_field(other);
        let mut out = Matrix::zeros(self.p, self.rows * other.rows, self.cols * other.cols);
        let pp = self.p as u64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j) as u64;
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let v = (a * other.get(k, l) as u64 % pp) as u32;
                        out.data[(i * other.rows + k) * out.cols + j * other.cols + l] = v;
                    }
                }
            }
        }
        out
    }

    /// Column-major flattening, the coordinate convention for spaces of maps.
    pub fn vectorize(&self) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for c in 0..self.cols {
            for r in 0..self.rows {
                v.push(self.get(r, c));
            }
        }
        v
    }

    pub fn unvectorize(p: u32, rows: usize, cols: usize, v: &[u32]) -> Matrix {
        assert_eq!(v.len(), rows * cols);
        let mut m = Matrix::zeros(p, rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                m.data[r * cols + c] = v[c * rows + r] % p;
            }
        }
        m
    }

    pub fn rref(&self) -> Rref {
        if self.p == 2 {
            return rref_f2(self);
        }
        let mut m = self.clone();
        let p = self.p as u64;
        let (rows, cols) = (m.rows, m.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| m.data[i * cols + c] != 0) else { continue };
            if pr != r {
                for j in 0..cols {
                    m.data.swap(pr * cols + j, r * cols + j);
                }
            }
            let iv = inv(self.p, m.data[r * cols + c]) as u64;
            for j in c..cols {
                m.data[r * cols + j] = (m.data[r * cols + j] as u64 * iv % p) as u32;
            }
            let pivot_row: Vec<u64> = (c..cols).map(|j| m.data[r * cols + j] as u64).collect();
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let f = m.data[i * cols + c] as u64;
                if f == 0 {
                    continue;
                }
                let g = p - f;
                let row = &mut m.data[i * cols + c..(i + 1) * cols];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    if y != 0 {
                        *x = ((*x as u64 + g * y) % p) as u32;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank()
    }

    /// Canonical solution of `self * X = b` (free coordinates set to zero), if any.
    pub fn solve(&self, b: &Matrix) -> Option<Matrix> {
        self.same_field(b);
        assert_eq!(self.rows, b.rows, "solve: right-hand side rows");
        let aug = Matrix::hstack(self.p, self.rows, &[self, b]);
        let red = aug.rref();
        let n = self.cols;
        if red.pivots.iter().any(|&c| c >= n) {
            return None;
        }
        let mut x = Matrix::zeros(self.p, n, b.cols);
        for (r, &c) in red.pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.data[c * b.cols + j] = red.matrix.get(r, n + j);
            }
        }
        Some(x)
    }

    /// Canonical kernel basis as the columns of the returned matrix.
    pub fn kernel_basis(&self) -> Matrix {
        let red = self.rref();
        kernel_from_rref(&red, self.cols, self.p)
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// Columns forming a basis of the column space (the pivot columns).
    pub fn column_space(&self) -> Matrix {
        let red = self.rref();
        self.select_cols(&red.pivots)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        self.solve(&Matrix::identity(self.p, self.rows)).filter(|x| self.mul(x).is_identity())
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.cols
    }

    pub fn is_surjective(&self) -> bool {
        self.rank() == self.rows
    }
}

fn kernel_from_rref(red: &Rref, n: usize, p: u32) -> Matrix {
    let pivset: Vec<Option<usize>> = {
        let mut v = vec![None; n];
        for (r, &c) in red.pivots.iter().enumerate() {
            v[c] = Some(r);
        }
        v
    };
    let free: Vec<usize> = (0..n).filter(|&c| pivset[c].is_none()).collect();
    let mut k = Matrix::zeros(p, n, free.len());
    for (j, &f) in free.iter().enumerate() {
        k.data[f * free.len() + j] = 1 % p;
        for (r, &c) in red.pivots.iter().enumerate() {
            let v = red.matrix.get(r, f);
            if v != 0 {
                k.data[c * free.len() + j] = (p - v) % p;
            }
        }
    }
    k
}

fn rref_f2(m: &Matrix) -> Rref {
    let (rows, cols) = (m.rows, m.cols);
    let words = cols.div_ceil(64);
    let mut bits = vec![0u64; rows * words];
    for r in 0..rows {
        for c in 0..cols {
            if m.data[r * cols + c] & 1 == 1 {
                bits[r * words + c / 64] |= 1 << (c % 64);
            }
        }
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (w, b) = (c / 64, 1u64 << (c % 64));
        let Some(pr) = (r..rows).find(|&i| bits[i * words + w] & b != 0) else { continue };
        if pr != r {
            for j in 0..words {
                bits.swap(pr * words + j, r * words + j);
            }
        }
        let pivot: Vec<u64> = bits[r * words + w..(r + 1) * words].to_vec();
        for i in 0..rows {
            if i != r && bits[i * words + w] & b != 0 {
                for (x, y) in bits[i * words + w..(i + 1) * words].iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut out = Matrix::zeros(2, rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if bits[r * words + c / 64] >> (c % 64) & 1 == 1 {
                out.data[r * cols + c] = 1;
            }
        }
    }
    Rref { matrix: out, pivots }
}

/// Extend the columns of `basis` (assumed independent) to a basis of F_p^n
/// using standard basis vectors; returns the indices of the added vectors.
pub fn complement_indices(basis: &Matrix) -> Vec<usize> {
    let n = basis.rows();
    let red = basis.transpose().rref();
    let mut used = vec![false; n];
    for &c in &red.pivots {
        used[c] = true;
    }
    (0..n).filter(|&i| !used[i]).collect()
}
