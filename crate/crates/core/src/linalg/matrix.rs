//! Dense real matrices.
//!
//! Storage is row-major: `data[i * cols + j]` holds entry `(i, j)`. Either
//! dimension may be zero, which is how empty factor matrices and the basis of
//! the trivial subspace are represented.
//!
//! Arithmetic operators panic on shape mismatch, like indexing out of
//! bounds. Public operations elsewhere in the crate validate shapes first and
//! report [`Error::ShapeMismatch`] instead.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::float::sqrt;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting NaN and infinities.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DataLength {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DataLength {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds a matrix from column-major data.
    pub fn from_column_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DataLength {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let mut out = vec![0.0; rows * cols];
        for j in 0..cols {
            for i in 0..rows {
                out[i * cols + j] = data[j * rows + i];
            }
        }
        Self::new(rows, cols, out)
    }

    /// # Panics
    ///
    /// Panics if `f` produces a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite matrix entry at ({i}, {j})");
                data.push(v);
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Generalized diagonal `rows x cols` matrix with `diag` on the main diagonal.
    pub fn from_diagonal(rows: usize, cols: usize, diag: &[f64]) -> Self {
        Self::from_fn(rows, cols, |i, j| {
            if i == j && i < diag.len() {
                diag[i]
            } else {
                0.0
            }
        })
    }

    /// Column vector with the given entries.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    /// The `n x idx.len()` matrix whose columns are the unit vectors `e_i`, `i in idx`.
    pub fn selector(n: usize, idx: &[usize]) -> Self {
        Self::from_fn(n, idx.len(), |i, j| if idx[j] == i { 1.0 } else { 0.0 })
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
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_column_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn row_vec(&self, i: usize) -> Vec<f64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col_vec(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hstack(&self, other: &Matrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch {
                op: "hstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let c = self.cols;
        Ok(Self::from_fn(self.rows, c + other.cols, |i, j| {
            if j < c {
                self.get(i, j)
            } else {
                other.get(i, j - c)
            }
        }))
    }

    /// Vertical concatenation `[self; other]`.
    pub fn vstack(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                op: "vstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let r = self.rows;
        Ok(Self::from_fn(r + other.rows, self.cols, |i, j| {
            if i < r {
                self.get(i, j)
            } else {
                other.get(i - r, j)
            }
        }))
    }

    pub fn frobenius_norm(&self) -> f64 {
        // scaled accumulation avoids overflow on large entries
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let s: f64 = self.data.iter().map(|v| (v / scale) * (v / scale)).sum();
        scale * sqrt(s)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| s * self.get(i, j))
    }

    /// `||self - other||_F`.
    ///
    /// # Panics
    ///
    /// Panics if the shapes differ.
    pub fn distance(&self, other: &Matrix) -> f64 {
        (self - other).frobenius_norm()
    }

    /// `||self^T - self||_F` for square matrices.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square(), "asymmetry of a non-square matrix");
        self.distance(&self.transpose())
    }

    fn assert_same_shape(&self, other: &Matrix, op: &str) {
        assert!(
            self.shape() == other.shape(),
            "{op}: shape mismatch {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert!(
            self.cols == rhs.rows,
            "matmul: shape mismatch {}x{} * {}x{}",
            self.rows,
            self.cols,
            rhs.rows,
            rhs.cols
        );
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let row = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[p * n..(p + 1) * n];
                for (o, b) in row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Matrix {
            rows: m,
            cols: n,
            data: out,
        }
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: f64) -> Matrix {
        self.scale(rhs)
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        self.assert_same_shape(rhs, "add");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        self.assert_same_shape(rhs, "sub");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = Matrix::new(1, 2, vec![1.0, f64::NAN]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn column_major_round_trip() {
        let m = Matrix::from_column_major(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]]).unwrap());
        assert_eq!(m.to_column_major(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn product_and_transpose() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 1.0], [2.0, 3.0, 2.0]]).unwrap();
        let g = &a * &a.transpose();
        assert_eq!(g, Matrix::from_rows(&[[6.0, 10.0], [10.0, 17.0]]).unwrap());
        let e = Matrix::zeros(2, 0);
        assert_eq!(&e * &Matrix::zeros(0, 3), Matrix::zeros(2, 3));
    }

    #[test]
    fn stacking() {
        let a = Matrix::identity(2);
        let h = a.hstack(&Matrix::column(&[5.0, 6.0]).unwrap()).unwrap();
        assert_eq!(h.shape(), (2, 3));
        assert_eq!(h.get(1, 2), 6.0);
        let v = a.vstack(&Matrix::zeros(1, 2)).unwrap();
        assert_eq!(v.shape(), (3, 2));
        assert!(a.hstack(&Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn selector_picks_columns() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let e = Matrix::selector(3, &[0, 2]);
        assert_eq!(&a * &e, a.select_columns(&[0, 2]));
    }

    #[test]
    fn frobenius_of_large_entries() {
        let a = Matrix::from_rows(&[[3e200, 4e200]]).unwrap();
        assert!((a.frobenius_norm() / 5e200 - 1.0).abs() < 1e-15);
    }
}
