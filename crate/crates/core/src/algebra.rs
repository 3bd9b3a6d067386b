//! Finite-dimensional unital associative algebras given by structure constants.

use crate::error::{Error, Result};
use crate::field::{check_prime, reduce, Matrix};
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

/// On-disk form of an algebra; integers are reduced mod p on load.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub p: u32,
    pub dim: usize,
    #[serde(default)]
    pub basis: Vec<String>,
    pub unit: Vec<i64>,
    pub mul: Vec<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radical: Option<Vec<Vec<i64>>>,
}

/// A validated algebra. `mul[(i*dim + j)*dim + k]` is the coefficient of e_k in e_i e_j.
#[derive(Clone, Debug)]
pub struct Algebra {
    p: u32,
    dim: usize,
    basis: Vec<String>,
    unit: Vec<u32>,
    mul: Vec<u32>,
    radical: Option<Matrix>,
    generators: Vec<usize>,
    regular_action: Vec<Matrix>,
    opposite: OnceLock<Arc<Algebra>>,
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.dim == other.dim && self.unit == other.unit && self.mul == other.mul
    }
}
impl Eq for Algebra {}

impl Algebra {
    pub fn from_file(raw: &AlgebraFile) -> Result<Arc<Algebra>> {
        check_prime(raw.p)?;
        let (p, n) = (raw.p, raw.dim);
        if raw.unit.len() != n {
            return Err(Error::Algebra(format!("unit has length {}, expected {n}", raw.unit.len())));
        }
        if raw.mul.len() != n || raw.mul.iter().any(|r| r.len() != n || r.iter().any(|c| c.len() != n)) {
            return Err(Error::Algebra(format!("structure constants must be {n}x{n}x{n}")));
        }
        let basis = if raw.basis.is_empty() {
            (0..n).map(|i| format!("e{i}")).collect()
        } else if raw.basis.len() == n {
            raw.basis.clone()
        } else {
            return Err(Error::Algebra("basis label count differs from dim".into()));
        };
        let mul = raw.mul.iter().flat_map(|r| r.iter().flat_map(|c| c.iter().map(|&x| reduce(p, x)))).collect();
        let unit = raw.unit.iter().map(|&x| reduce(p, x)).collect();
        let radical = match &raw.radical {
            None => None,
            Some(vs) => {
                if vs.iter().any(|v| v.len() != n) {
                    return Err(Error::Algebra("radical vectors must have length dim".into()));
                }
                let cols: Vec<Vec<u32>> = vs.iter().map(|v| v.iter().map(|&x| reduce(p, x)).collect()).collect();
                Some(Matrix::from_cols(p, n, &cols))
            }
        };
        Algebra::new(p, basis, unit, mul, radical)
    }

    /// Validate the raw data and build the algebra.
    pub fn new(p: u32, basis: Vec<String>, unit: Vec<u32>, mul: Vec<u32>, radical: Option<Matrix>) -> Result<Arc<Algebra>> {
        check_prime(p)?;
        let dim = basis.len();
        assert_eq!(mul.len(), dim * dim * dim);
        let mut a = Algebra { p, dim, basis, unit, mul, radical: None, generators: vec![], regular_action: vec![], opposite: OnceLock::new() };
        a.check_associative()?;
        a.check_unit()?;
        if let Some(r) = radical {
            a.check_radical(&r)?;
            a.radical = Some(r.column_space());
        }
        a.regular_action = (0..dim).map(|k| a.right_mult_matrix(k)).collect();
        a.generators = a.find_generators();
        Ok(Arc::new(a))
    }

    pub fn to_file(&self) -> AlgebraFile {
        let n = self.dim;
        AlgebraFile {
            p: self.p,
            dim: n,
            basis: self.basis.clone(),
            unit: self.unit.iter().map(|&x| x as i64).collect(),
            mul: (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| self.c(i, j, k) as i64).collect()).collect()).collect(),
            radical: self.radical.as_ref().map(|r| (0..r.cols()).map(|c| r.col(c).iter().map(|&x| x as i64).collect()).collect()),
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn basis(&self) -> &[String] {
        &self.basis
    }
    pub fn unit(&self) -> &[u32] {
        &self.unit
    }
    pub fn radical(&self) -> Option<&Matrix> {
        self.radical.as_ref()
    }

    /// Basis indices generating the algebra together with the unit.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> u32 {
        self.mul[(i * self.dim + j) * self.dim + k]
    }

    pub fn multiply(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let (n, p) = (self.dim, self.p as u64);
        let mut out = vec![0u64; n];
        for i in 0..n {
            if a[i] == 0 {
                continue;
            }
            for j in 0..n {
                if b[j] == 0 {
                    continue;
                }
                let s = a[i] as u64 * b[j] as u64 % p;
                for (k, o) in out.iter_mut().enumerate() {
                    *o = (*o + s * self.c(i, j, k) as u64) % p;
                }
            }
        }
        out.into_iter().map(|x| x as u32).collect()
    }

    pub fn basis_vector(&self, i: usize) -> Vec<u32> {
        let mut v = vec![0; self.dim];
        v[i] = 1;
        v
    }

    /// Matrix of right multiplication by e_k on Λ: column l is e_l e_k.
    fn right_mult_matrix(&self, k: usize) -> Matrix {
        let mut m = Matrix::zeros(self.p, self.dim, self.dim);
        for l in 0..self.dim {
            for t in 0..self.dim {
                m.set(t, l, self.c(l, k, t));
            }
        }
        m
    }

    /// Action matrices of the right regular module Λ_Λ.
    pub fn regular_action(&self) -> &[Matrix] {
        &self.regular_action
    }

    fn check_associative(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (ei, ej, ek) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
                    let l = self.multiply(&self.multiply(&ei, &ej), &ek);
                    let r = self.multiply(&ei, &self.multiply(&ej, &ek));
                    if l != r {
                        return Err(Error::Algebra(format!(
                            "not associative on basis triple ({}, {}, {})",
                            self.basis[i], self.basis[j], self.basis[k]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_unit(&self) -> Result<()> {
        for i in 0..self.dim {
            let e = self.basis_vector(i);
            if self.multiply(&self.unit, &e) != e || self.multiply(&e, &self.unit) != e {
                return Err(Error::Algebra(format!("unit axiom fails at basis element {}", self.basis[i])));
            }
        }
        Ok(())
    }

    fn span_contains(&self, span: &Matrix, v: &[u32]) -> bool {
        span.solve(&Matrix::column_vector(self.p, v)).is_some()
    }

    fn check_radical(&self, r: &Matrix) -> Result<()> {
        let r = r.column_space();
        for c in 0..r.cols() {
            let v = r.col(c);
            for i in 0..self.dim {
                let e = self.basis_vector(i);
                if !self.span_contains(&r, &self.multiply(&e, &v)) || !self.span_contains(&r, &self.multiply(&v, &e)) {
                    return Err(Error::Algebra("declared radical is not a two-sided ideal".into()));
                }
            }
        }
        // Powers I, I^2, ... must reach zero within dim steps.
        let mut power = r.clone();
        for _ in 0..=self.dim {
            if power.cols() == 0 {
                return Ok(());
            }
            let mut prods = Vec::new();
            for a in 0..power.cols() {
                for b in 0..r.cols() {
                    prods.push(self.multiply(&power.col(a), &r.col(b)));
                }
            }
            power = Matrix::from_cols(self.p, self.dim, &prods).column_space();
        }
        Err(Error::Algebra("declared radical is not nilpotent".into()))
    }

    /// Greedy choice of basis elements generating Λ as a unital algebra.
    fn find_generators(&self) -> Vec<usize> {
        let mut gens: Vec<usize> = Vec::new();
        loop {
            let sub = self.generated_subalgebra(&gens);
            if sub.cols() == self.dim {
                return gens;
            }
            let next = (0..self.dim).find(|&i| !self.span_contains(&sub, &self.basis_vector(i)));
            match next {
                Some(i) => gens.push(i),
                None => return gens,
            }
        }
    }

    fn generated_subalgebra(&self, gens: &[usize]) -> Matrix {
        let mut vecs = vec![self.unit.clone()];
        vecs.extend(gens.iter().map(|&g| self.basis_vector(g)));
        let mut span = Matrix::from_cols(self.p, self.dim, &vecs).column_space();
        loop {
            let cols: Vec<Vec<u32>> = (0..span.cols()).map(|c| span.col(c)).collect();
            let mut all = cols.clone();
            for a in &cols {
                for b in &cols {
                    all.push(self.multiply(a, b));
                }
            }
            let next = Matrix::from_cols(self.p, self.dim, &all).column_space();
            if next.cols() == span.cols() {
                return span;
            }
            span = next;
        }
    }

    /// Opposite algebra: c'[i][j][k] = c[j][i][k].
    pub fn opposite(&self) -> Arc<Algebra> {
        self.opposite.get_or_init(|| self.build_opposite()).clone()
    }

    fn build_opposite(&self) -> Arc<Algebra> {
        let n = self.dim;
        let mut mul = vec![0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    mul[(i * n + j) * n + k] = self.c(j, i, k);
                }
            }
        }
        Algebra::new(self.p, self.basis.clone(), self.unit.clone(), mul, self.radical.clone())
            .expect("opposite of a valid algebra is valid")
    }

    /// Structural equality with a pointer fast path.
    pub fn same(a: &Arc<Algebra>, b: &Arc<Algebra>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| self.c(i, j, k) == self.c(j, i, k))))
    }
}

/// Standard algebras used by fixtures and tests.
pub mod standard {
    use super::*;

    /// F_p[x]/(x^n) with basis 1, x, ..., x^{n-1}; radical spanned by the x^i, i ≥ 1.
    pub fn truncated_polynomial(p: u32, n: usize) -> Arc<Algebra> {
        let mut mul = vec![0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                if i + j < n {
                    mul[(i * n + j) * n + i + j] = 1;
                }
            }
        }
        let mut unit = vec![0; n];
        unit[0] = 1;
        let basis = (0..n).map(|i| if i == 0 { "1".to_string() } else if i == 1 { "x".into() } else { format!("x^{i}") }).collect();
        let rad: Vec<Vec<u32>> = (1..n).map(|i| (0..n).map(|t| (t == i) as u32).collect()).collect();
        Algebra::new(p, basis, unit, mul, Some(Matrix::from_cols(p, n, &rad))).unwrap()
    }

    /// The dual numbers F_p[x]/(x²).
    pub fn dual_numbers(p: u32) -> Arc<Algebra> {
        truncated_polynomial(p, 2)
    }

    /// Upper triangular 2×2 matrices: basis e11, e12, e22.
    pub fn upper_triangular(p: u32) -> Arc<Algebra> {
        let n = 3;
        let mut mul = vec![0; n * n * n];
        let mut set = |i: usize, j: usize, k: usize| mul[(i * n + j) * n + k] = 1;
        // e11 e11 = e11, e11 e12 = e12, e12 e22 = e12, e22 e22 = e22
        set(0, 0, 0);
        set(0, 1, 1);
        set(1, 2, 1);
        set(2, 2, 2);
        let rad = Matrix::from_cols(p, 3, &[vec![0, 1, 0]]);
        Algebra::new(p, vec!["e11".into(), "e12".into(), "e22".into()], vec![1, 0, 1], mul, Some(rad)).unwrap()
    }

    /// The group algebra F_p[C_n] with basis g^0, ..., g^{n-1}.
    pub fn cyclic_group(p: u32, n: usize) -> Arc<Algebra> {
        let mut mul = vec![0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                mul[(i * n + j) * n + (i + j) % n] = 1;
            }
        }
        let mut unit = vec![0; n];
        unit[0] = 1;
        Algebra::new(p, (0..n).map(|i| format!("g{i}")).collect(), unit, mul, None).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::standard::*;
    use super::*;

    #[test]
    fn dual_numbers_valid() {
        let a = dual_numbers(2);
        assert_eq!(a.dim(), 2);
        assert_eq!(a.generators(), &[1]);
        assert!(a.is_commutative());
    }

    #[test]
    fn nonassociative_rejected() {
        let mut f = dual_numbers(2).to_file();
        // x·x = x makes x idempotent; now break (x·x)·1 vs x·(x·1) via x·1 = 0
        f.mul[1][1] = vec![0, 1];
        f.mul[1][0] = vec![0, 0];
        let err = Algebra::from_file(&f).unwrap_err().to_string();
        assert!(err.contains("associative") || err.contains("unit"), "{err}");
    }

    #[test]
    fn nonassociative_with_witness() {
        // basis 1, x, y with x·x = y, x·y = 0 but y·x = ... break: (x x) x = y x = y, x (x x) = x y = 0
        let n = 3;
        let mut mul = vec![vec![vec![0i64; n]; n]; n];
        for i in 0..n {
            mul[0][i][i] = 1;
            mul[i][0][i] = 1;
        }
        mul[1][1][2] = 1;
        mul[2][1][2] = 1;
        let f = AlgebraFile { p: 2, dim: 3, basis: vec![], unit: vec![1, 0, 0], mul, radical: None };
        let err = Algebra::from_file(&f).unwrap_err().to_string();
        assert!(err.contains("not associative on basis triple"), "{err}");
    }

    #[test]
    fn unit_failure() {
        let mut f = dual_numbers(2).to_file();
        f.unit = vec![0, 1];
        assert!(Algebra::from_file(&f).unwrap_err().to_string().contains("unit"));
    }

    #[test]
    fn non_nilpotent_radical() {
        let mut f = dual_numbers(2).to_file();
        f.radical = Some(vec![vec![1, 0]]);
        assert!(Algebra::from_file(&f).is_err());
    }

    #[test]
    fn non_prime_rejected() {
        let mut f = dual_numbers(2).to_file();
        f.p = 4;
        assert!(Algebra::from_file(&f).is_err());
    }

    #[test]
    fn opposite_involution() {
        let a = upper_triangular(2);
        let op = a.opposite();
        assert_ne!(*op, *a);
        assert_eq!(*op.opposite(), *a);
        let d = dual_numbers(2);
        assert_eq!(*d.opposite(), *d);
    }

    #[test]
    fn regular_action_is_right_module() {
        for a in [dual_numbers(3), upper_triangular(2), cyclic_group(3, 3)] {
            let acts = a.regular_action();
            let n = a.dim();
            for i in 0..n {
                for j in 0..n {
                    let mut lhs = Matrix::zeros(a.p(), n, n);
                    for k in 0..n {
                        lhs = lhs.add(&acts[k].scale(a.c(i, j, k) as i64));
                    }
                    assert_eq!(lhs, acts[j].mul(&acts[i]));
                }
            }
        }
    }
}
