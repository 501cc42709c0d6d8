//! Minimal dense linear algebra for the small symmetric systems the ridge
//! solver produces. Row-major storage, `f64` only. Not a general-purpose
//! library: dimensions here are "number of features", so everything is tiny
//! and clarity wins over blocking or vectorization tricks.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    nrows: usize,
    ncols: usize,
}

impl Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            data: vec![0.0; nrows * ncols],
            nrows,
            ncols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row-major data; `data.len()` must equal
    /// `nrows * ncols`.
    pub fn from_vec(data: Vec<f64>, nrows: usize, ncols: usize) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::invalid(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                nrows,
                ncols
            )));
        }
        Ok(Self { data, nrows, ncols })
    }

    /// Builds a matrix from equal-length rows; at least one row is required.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::invalid("matrix needs at least one row"));
        }
        let ncols = rows[0].len();
        if ncols == 0 {
            return Err(Error::invalid("matrix needs at least one column"));
        }
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::invalid(format!(
                    "row {} has {} columns, expected {}",
                    i,
                    row.len(),
                    ncols
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { data, nrows, ncols })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        debug_assert_eq!(self.nrows, self.ncols);
        (0..self.nrows).map(|i| self.get(i, i)).sum()
    }

    /// New matrix containing the given rows of `self`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.ncols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            data,
            nrows: indices.len(),
            ncols: self.ncols,
        }
    }

    /// Gram matrix X^T X (ncols x ncols). Symmetric by construction: the
    /// upper triangle is computed once and mirrored.
    pub fn gram(&self) -> Matrix {
        let p = self.ncols;
        let mut g = Matrix::zeros(p, p);
        for j in 0..p {
            for k in j..p {
                let mut acc = 0.0;
                for i in 0..self.nrows {
                    acc += self.get(i, j) * self.get(i, k);
                }
                g.set(j, k, acc);
                g.set(k, j, acc);
            }
        }
        g
    }

    /// X^T y (length ncols). `y.len()` must equal `nrows`.
    pub fn mul_transpose_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            let row = self.row(i);
            let yi = y[i];
            for (o, &x) in out.iter_mut().zip(row) {
                *o += x * yi;
            }
        }
        out
    }

    /// X w (length nrows). `w.len()` must equal `ncols`.
    pub fn mul_vec(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.ncols);
        (0..self.nrows).map(|i| dot(self.row(i), w)).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

/// Factors `a` as L L^T. Only the lower triangle of `a` is read. A pivot
/// that is not strictly positive aborts with `Error::Singular` naming the
/// offending row.
pub fn cholesky(a: &Matrix) -> Result<Cholesky> {
    if a.nrows() != a.ncols() {
        return Err(Error::invalid(format!(
            "Cholesky needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let mut l = Matrix::zeros(n, n);
    for k in 0..n {
        let mut pivot = a.get(k, k);
        for j in 0..k {
            let v = l.get(k, j);
            pivot -= v * v;
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::Singular {
                index: k,
                value: pivot,
            });
        }
        let lkk = pivot.sqrt();
        l.set(k, k, lkk);
        for i in (k + 1)..n {
            let mut acc = a.get(i, k);
            for j in 0..k {
                acc -= l.get(i, j) * l.get(k, j);
            }
            l.set(i, k, acc / lkk);
        }
    }
    Ok(Cholesky { l })
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solves A x = b by forward, then backward substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.dim());
        let n = self.dim();
        // L z = b
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.l.get(i, j) * z[j];
            }
            z[i] = acc / self.l.get(i, i);
        }
        // L^T x = z
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in (i + 1)..n {
                acc -= self.l.get(j, i) * x[j];
            }
            x[i] = acc / self.l.get(i, i);
        }
        x
    }

    /// A^-1, exactly symmetric: off-diagonal pairs are averaged after the
    /// column solves so `inv[i][j]` and `inv[j][i]` share bits.
    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e);
            e[j] = 0.0;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (inv.get(i, j) + inv.get(j, i));
                inv.set(i, j, s);
                inv.set(j, i, s);
            }
        }
        inv
    }

    /// ln det A = 2 sum ln L_kk.
    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|k| 2.0 * self.l.get(k, k).ln()).sum()
    }
}
