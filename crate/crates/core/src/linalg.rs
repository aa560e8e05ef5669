//! Small fixed-capacity vectors and matrices for pointwise work in dimension
//! one to three. Everything is `Copy` so the inner loops never allocate.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Index, Mul, Neg, Sub};

/// Largest dimension supported by the pointwise types.
pub const MAX_DIM: usize = 3;

/// A point or vector in `R^dim`, `dim <= 3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vector {
    dim: usize,
    c: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        Vector {
            dim,
            c: [0.0; MAX_DIM],
        }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut v = Vector::zeros(xs.len());
        v.c[..xs.len()].copy_from_slice(xs);
        v
    }

    pub fn new1(x: f64) -> Self {
        Vector::from_slice(&[x])
    }

    pub fn new2(x: f64, y: f64) -> Self {
        Vector::from_slice(&[x, y])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        assert!(i < self.dim);
        self.c[i] = v;
    }

    pub fn dot(&self, o: &Vector) -> f64 {
        debug_assert_eq!(self.dim, o.dim);
        (0..self.dim).map(|i| self.c[i] * o.c[i]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        let mut r = *self;
        for i in 0..self.dim {
            r.c[i] *= s;
        }
        r
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|x| x.is_finite())
    }

    /// `self ⊗ self`.
    pub fn outer(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                m.set(i, j, self.c[i] * self.c[j]);
            }
        }
        m
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, o: Vector) -> Vector {
        debug_assert_eq!(self.dim, o.dim);
        let mut r = self;
        for i in 0..self.dim {
            r.c[i] += o.c[i];
        }
        r
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, o: Vector) -> Vector {
        debug_assert_eq!(self.dim, o.dim);
        let mut r = self;
        for i in 0..self.dim {
            r.c[i] -= o.c[i];
        }
        r
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl Serialize for Vector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let xs = Vec::<f64>::deserialize(d)?;
        if xs.is_empty() || xs.len() > MAX_DIM {
            return Err(serde::de::Error::custom("vector dimension must be 1..=3"));
        }
        Ok(Vector::from_slice(&xs))
    }
}

/// Symmetric matrix stored as its upper triangle. Symmetry holds by
/// construction since there is only one storage slot per off-diagonal pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    // (0,0) (0,1) (0,2) (1,1) (1,2) (2,2)
    a: [f64; 6],
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        SymMatrix { dim, a: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix::diag(&vec![1.0; dim])
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// 2x2 from entries `[[a, b], [b, c]]`.
    pub fn new2(a: f64, b: f64, c: f64) -> Self {
        let mut m = SymMatrix::zeros(2);
        m.set(0, 0, a);
        m.set(0, 1, b);
        m.set(1, 1, c);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[tri(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.dim && j < self.dim);
        self.a[tri(i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        let mut r = *self;
        for v in r.a.iter_mut() {
            *v *= s;
        }
        r
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|x| x.is_finite())
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        debug_assert_eq!(self.dim, v.dim());
        let mut r = Vector::zeros(self.dim);
        for i in 0..self.dim {
            r.set(i, (0..self.dim).map(|j| self.get(i, j) * v[j]).sum());
        }
        r
    }

    /// `v^T M v`.
    pub fn quad(&self, v: &Vector) -> f64 {
        v.dot(&self.mul_vec(v))
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(i, j))
    }

    pub fn frobenius(&self) -> f64 {
        self.to_matrix().frobenius()
    }

    /// Eigenvalues in ascending order. Closed form for `dim <= 2`, symmetric
    /// QL iteration (nalgebra) for `dim = 3`.
    pub fn eigenvalues(&self) -> Eigenvalues {
        match self.dim {
            1 => Eigenvalues {
                n: 1,
                e: [self.a[0], 0.0, 0.0],
            },
            2 => {
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(1, 1));
                let m = 0.5 * (a + c);
                let r = (0.5 * (a - c)).hypot(b);
                Eigenvalues {
                    n: 2,
                    e: [m - r, m + r, 0.0],
                }
            }
            _ => {
                let m = nalgebra::Matrix3::from_fn(|i, j| self.get(i, j));
                let eig = nalgebra::SymmetricEigen::new(m);
                let mut e = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
                e.sort_by(|x, y| x.total_cmp(y));
                Eigenvalues { n: 3, e }
            }
        }
    }
}

impl Add for SymMatrix {
    type Output = SymMatrix;
    fn add(self, o: SymMatrix) -> SymMatrix {
        debug_assert_eq!(self.dim, o.dim);
        let mut r = self;
        for k in 0..6 {
            r.a[k] += o.a[k];
        }
        r
    }
}

impl Sub for SymMatrix {
    type Output = SymMatrix;
    fn sub(self, o: SymMatrix) -> SymMatrix {
        self + o.scale(-1.0)
    }
}

impl Neg for SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        self.scale(-1.0)
    }
}

/// Ascending eigenvalues of a [`SymMatrix`].
#[derive(Clone, Copy, Debug)]
pub struct Eigenvalues {
    n: usize,
    e: [f64; MAX_DIM],
}

impl Eigenvalues {
    pub fn as_slice(&self) -> &[f64] {
        &self.e[..self.n]
    }
}

/// General (not necessarily symmetric) square matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    a: [f64; 9],
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} unsupported");
        Matrix { dim, a: [0.0; 9] }
    }

    pub fn identity(dim: usize) -> Self {
        Matrix::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i * MAX_DIM + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * MAX_DIM + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.dim && j < self.dim);
        self.a[i * MAX_DIM + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| s * self.get(i, j))
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.get(i, j) * self.get(i, j);
            }
        }
        s.sqrt()
    }

    /// `(M + M^T) / 2`.
    pub fn sym_part(&self) -> SymMatrix {
        let mut s = SymMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                s.set(i, j, 0.5 * (self.get(i, j) + self.get(j, i)));
            }
        }
        s
    }

    pub fn determinant(&self) -> f64 {
        match self.dim {
            1 => self.a[0],
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            _ => {
                let g = |i, j| self.get(i, j);
                g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                    - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                    + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
            }
        }
    }

    pub fn max_abs_diff(&self, o: &Matrix) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max((self.get(i, j) - o.get(i, j)).abs());
            }
        }
        m
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, o: Matrix) -> Matrix {
        debug_assert_eq!(self.dim, o.dim);
        Matrix::from_fn(self.dim, |i, j| {
            (0..self.dim).map(|k| self.get(i, k) * o.get(k, j)).sum()
        })
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(self, o: Matrix) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(i, j) + o.get(i, j))
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, o: Matrix) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(i, j) - o.get(i, j))
    }
}

impl From<SymMatrix> for Matrix {
    fn from(s: SymMatrix) -> Matrix {
        s.to_matrix()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_eigenvalues_match_nalgebra() {
        let m = SymMatrix::new2(1.5, -0.7, 0.25);
        let e = m.eigenvalues();
        let n = nalgebra::Matrix2::new(1.5, -0.7, -0.7, 0.25);
        let mut r: Vec<f64> = nalgebra::SymmetricEigen::new(n)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        r.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in e.as_slice().iter().zip(&r) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn three_dim_eigenvalues_are_sorted() {
        let mut m = SymMatrix::diag(&[3.0, -1.0, 2.0]);
        m.set(0, 2, 0.1);
        let e = m.eigenvalues();
        let s = e.as_slice();
        assert!(s[0] <= s[1] && s[1] <= s[2]);
        assert!((s.iter().sum::<f64>() - m.trace()).abs() < 1e-12);
    }

    #[test]
    fn determinant_of_rank_one_update() {
        let p = Vector::new2(0.6, 0.8);
        let m = Matrix::identity(2) + Matrix::from(p.outer()).scale(2.0);
        assert!((m.determinant() - 3.0).abs() < 1e-14);
    }
}
