//! Small dense complex matrices.
//!
//! Entries are indexed `[target, source]`: a matrix acts on column vectors of
//! state amplitudes, so column `j` is the image of basis state `j`.

use std::ops::{Add, Index, IndexMut, Mul};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = Complex::one();
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if `rows` is not square.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix rows must form a square");
            data.extend(row);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, source: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|t| self[(t, source)]).collect()
    }

    pub fn set_column(&mut self, source: usize, column: &[Complex<T>]) {
        for (t, v) in column.iter().enumerate() {
            self[(t, source)] = *v;
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    /// `M† M`, the effect of this element.
    pub fn gram(&self) -> Self {
        &self.adjoint() * self
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| *v * factor).collect(),
        }
    }

    /// Keeps only the rows whose index satisfies `keep`.
    pub fn restrict_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in (0..self.dim).filter(|&r| keep(r)) {
            for c in 0..self.dim {
                out[(r, c)] = self[(r, c)];
            }
        }
        out
    }

    /// Simultaneous row/column relabeling: entry `[t, s]` moves to
    /// `[perm[t], perm[s]]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(perm[r], perm[c])] = self[(r, c)];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn row_is_zero(&self, row: usize) -> bool {
        (0..self.dim).all(|c| self[(row, c)].is_zero())
    }

    /// `max |(M†M)_{ij} - δ_{ij}|`.
    pub fn unitarity_residual(&self) -> T {
        self.gram().max_abs_diff(&Self::identity(self.dim))
    }

    /// Fills every column with `filled[j] == false` by Gram–Schmidt over the
    /// standard basis, trying candidates in index order. Returns `false` if
    /// the basis ran out before every column was filled.
    pub fn complete_orthonormal(&mut self, filled: &[bool]) -> bool {
        assert_eq!(filled.len(), self.dim);
        let threshold = T::validation_tol().sqrt();
        let mut basis: Vec<Vec<Complex<T>>> = (0..self.dim)
            .filter(|&j| filled[j])
            .map(|j| self.column(j))
            .collect();
        let mut next_candidate = 0;
        for j in (0..self.dim).filter(|&j| !filled[j]) {
            let mut found = None;
            while next_candidate < self.dim {
                let k = next_candidate;
                next_candidate += 1;
                let mut v = vec![Complex::zero(); self.dim];
                v[k] = Complex::one();
                // two passes keep the result orthogonal to working precision
                for _ in 0..2 {
                    for b in &basis {
                        let overlap: Complex<T> =
                            b.iter().zip(&v).map(|(x, y)| x.conj() * *y).sum();
                        for (vi, bi) in v.iter_mut().zip(b) {
                            *vi = *vi - *bi * overlap;
                        }
                    }
                }
                let norm = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
                if norm > threshold {
                    let unit: Vec<_> = v.into_iter().map(|x| x / norm).collect();
                    found = Some(unit);
                    break;
                }
            }
            match found {
                Some(col) => {
                    self.set_column(j, &col);
                    basis.push(col);
                }
                None => return false,
            }
        }
        true
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.dim + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.dim + c]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] = out[(r, c)] + a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}
