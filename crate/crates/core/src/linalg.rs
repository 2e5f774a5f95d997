//! Dense complex matrices, LU determinants and Hermitian eigenvalues.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

/// Determinant in polar/log form: `det = phase * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet<T> {
    /// Unit-modulus phase factor (zero when the matrix is singular).
    pub phase: Complex<T>,
    pub log_abs: T,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// `value * I`.
    pub fn scalar(n: usize, value: Complex<T>) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = value;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// True when every entry has an exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == T::zero())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sqr().sqrt()
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_residual(&self) -> T {
        debug_assert!(self.is_square());
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Replaces the matrix with `(A + A*) / 2`.
    pub fn symmetrize(&mut self) {
        let half = T::from_f64(0.5).unwrap();
        for i in 0..self.rows {
            for j in i..self.cols {
                let avg = (self[(i, j)] + self[(j, i)].conj()) * half;
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(Complex::zero(), |a, b| a + b)
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Result<Complex<T>> {
        let ld = self.log_determinant()?;
        if ld.phase == Complex::zero() {
            return Ok(Complex::zero());
        }
        Ok(ld.phase * ld.log_abs.exp())
    }

    /// Determinant in log form, safe against overflow for large matrices.
    pub fn log_determinant(&self) -> Result<LogDet<T>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut phase = Complex::<T>::one();
        let mut log_abs = T::zero();
        for k in 0..n {
            let (mut piv, mut best) = (k, T::zero());
            for i in k..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == T::zero() {
                return Ok(LogDet {
                    phase: Complex::zero(),
                    log_abs: T::neg_infinity(),
                });
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                phase = -phase;
            }
            let pivot = a[k * n + k];
            phase = phase * (pivot / pivot.norm());
            log_abs = log_abs + pivot.norm().ln();
            for i in (k + 1)..n {
                let factor = a[i * n + k] / pivot;
                if factor == Complex::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let upd = factor * a[k * n + j];
                    a[i * n + j] = a[i * n + j] - upd;
                }
            }
        }
        Ok(LogDet { phase, log_abs })
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for k in 0..n {
            let (mut piv, mut best) = (k, T::zero());
            for i in k..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == T::zero() {
                return Err(Error::InvalidParameter("singular matrix".into()));
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                    inv.data.swap(k * n + j, piv * n + j);
                }
            }
            let p = a[(k, k)];
            for j in 0..n {
                a[(k, j)] = a[(k, j)] / p;
                inv[(k, j)] = inv[(k, j)] / p;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f == Complex::zero() {
                    continue;
                }
                for j in 0..n {
                    let (ak, ik) = (a[(k, j)], inv[(k, j)]);
                    a[(i, j)] = a[(i, j)] - f * ak;
                    inv[(i, j)] = inv[(i, j)] - f * ik;
                }
            }
        }
        Ok(inv)
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<T>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "eigenvalues of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        if self.rows == 0 {
            return Ok(Vec::new());
        }
        T::hermitian_eigenvalues(self)
    }
}

impl<T: Real> CMatrix<T> {
    /// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian
    /// matrix.
    pub fn hermitian_eigen(&self) -> Result<(Vec<T>, CMatrix<T>)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("eigen-decomposition of a non-square matrix".into()));
        }
        if self.rows == 0 {
            return Ok((Vec::new(), CMatrix::zeros(0, 0)));
        }
        T::hermitian_eigen(self)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn determinant_of_small_matrices() {
        let m = CMatrix::from_real_diagonal(&[2.0, 3.0]);
        assert!((m.determinant().unwrap() - c(6.0, 0.0)).norm() < 1e-14);

        // [[0, 1], [1, 0]] needs a pivot swap.
        let swap = CMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!((swap.determinant().unwrap() - c(-1.0, 0.0)).norm() < 1e-14);

        let herm = CMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(5.0, 0.0)]).unwrap();
        // 5 - |2i|^2 = 1
        assert!((herm.determinant().unwrap() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_zero_determinant() {
        let m = CMatrix::from_fn(3, 3, |i, _| c(i as f64, 0.0));
        assert_eq!(m.determinant().unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = CMatrix::from_fn(4, 4, |i, j| c(((i * 3 + j) as f64).cos(), if i == j { 2.0 } else { 0.1 * j as f64 }));
        let prod = &m * &m.inverse().unwrap();
        let err = (&prod - &CMatrix::identity(4)).max_abs();
        assert!(err < 1e-12, "err = {err}");
    }

    #[test]
    fn hermitian_eigenvalues_complex_and_real_paths() {
        let real = CMatrix::from_real_diagonal(&[3.0, -1.0, 2.0]);
        assert_eq!(real.hermitian_eigenvalues().unwrap(), vec![-1.0, 2.0, 3.0]);

        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let cplx = CMatrix::from_vec(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]).unwrap();
        let ev = cplx.hermitian_eigenvalues().unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-13 && (ev[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        let m = CMatrix::from_vec(2, 2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]).unwrap();
        let (vals, vecs) = m.hermitian_eigen().unwrap();
        let lam = CMatrix::from_real_diagonal(&vals);
        let back = &(&vecs * &lam) * &vecs.adjoint();
        assert!((&back - &m).max_abs() < 1e-13);
    }

    #[test]
    fn symmetrize_removes_antihermitian_part() {
        let mut m = CMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(m.hermitian_residual(), 1.0);
        m.symmetrize();
        assert_eq!(m.hermitian_residual(), 0.0);
    }
}
