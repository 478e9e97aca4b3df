//! Dense column-major matrices.
//!
//! Entry `(i, j)` lives at `data[i + j * rows]`, so every column is a
//! contiguous slice. Panel kernels rely on that.

use std::fmt;
use std::ops::{Index, IndexMut, Range};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// The first `cols` columns of the `rows x rows` identity.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from row-major values, the natural order for literals.
    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                values.len()
            )));
        }
        Ok(Self::from_fn(rows, cols, |i, j| values[i * cols + j]))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::dim("ragged rows"));
        }
        Ok(Self::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn column_vector(values: &[f64]) -> Self {
        Matrix {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
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

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    /// Mutable access to two distinct columns at once.
    pub fn col_pair_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        assert!(a != b, "col_pair_mut needs distinct columns");
        let r = self.rows;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * r);
            (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * r);
            (&mut hi[..r], &mut lo[b * r..(b + 1) * r])
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for j in 0..self.cols {
            for (i, v) in self.col(j).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copy of rows `rows` and columns `cols`.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Matrix {
        assert!(rows.end <= self.rows && cols.end <= self.cols);
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (jj, j) in cols.enumerate() {
            out.col_mut(jj)
                .copy_from_slice(&self.col(j)[rows.start..rows.end]);
        }
        out
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for j in 0..block.cols {
            self.col_mut(c0 + j)[r0..r0 + block.rows].copy_from_slice(block.col(j));
        }
    }

    /// Gathers the listed row ranges (in order) into a new matrix.
    pub fn gather_rows(&self, ranges: &[Range<usize>]) -> Matrix {
        let total: usize = ranges.iter().map(|r| r.len()).sum();
        let mut out = Matrix::zeros(total, self.cols);
        for j in 0..self.cols {
            let src = self.col(j);
            let dst = out.col_mut(j);
            let mut at = 0;
            for r in ranges {
                dst[at..at + r.len()].copy_from_slice(&src[r.clone()]);
                at += r.len();
            }
        }
        out
    }

    /// Inverse of [`Matrix::gather_rows`].
    pub fn scatter_rows(&mut self, ranges: &[Range<usize>], block: &Matrix) {
        assert_eq!(block.cols, self.cols);
        for j in 0..self.cols {
            let src = block.col(j);
            let dst = self.col_mut(j);
            let mut at = 0;
            for r in ranges {
                dst[r.clone()].copy_from_slice(&src[at..at + r.len()]);
                at += r.len();
            }
        }
    }

    /// Stacks matrices with equal column counts vertically.
    pub fn vstack(parts: &[Matrix]) -> Result<Matrix> {
        let cols = parts.first().map_or(0, |p| p.cols);
        if parts.iter().any(|p| p.cols != cols) {
            return Err(Error::dim("vstack: column counts differ"));
        }
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut r0 = 0;
        for p in parts {
            out.set_submatrix(r0, 0, p);
            r0 += p.rows;
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let oc = other.col(j);
            let dst = out.col_mut(j);
            for (k, &b) in oc.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::dim(format!(
                "tr_matmul: ({}x{})ᵀ times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.cols, other.cols, |i, j| {
            dot(self.col(i), other.col(j))
        }))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(Error::dim("sub: shapes differ"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// 2-norm estimate by power iteration on `AᵀA`, relative tolerance 1e-6.
    pub fn two_norm_estimate(&self) -> f64 {
        if self.is_empty() || self.max_abs() == 0.0 {
            return 0.0;
        }
        // A deterministic start vector that is unlikely to be orthogonal to
        // the dominant right singular vector.
        let mut x: Vec<f64> = (0..self.cols)
            .map(|j| 1.0 + 0.5 * ((j as f64) * 0.7).sin())
            .collect();
        normalize(&mut x);
        let mut sigma = 0.0;
        for _ in 0..10_000 {
            let y = self.mul_vec(&x);
            let mut z = self.tr_mul_vec(&y);
            let lambda = frobenius(&z);
            if lambda == 0.0 {
                return 0.0;
            }
            let next = lambda.sqrt();
            z.iter_mut().for_each(|v| *v /= lambda);
            x = z;
            if (next - sigma).abs() <= 1e-9 * next {
                return next;
            }
            sigma = next;
        }
        sigma
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (yi, a) in y.iter_mut().zip(self.col(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        (0..self.cols).map(|j| dot(self.col(j), y)).collect()
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.cols).all(|j| self.col(j).iter().skip(j + 1).all(|&v| v == 0.0))
    }

    /// Upper triangle (incl. diagonal) of the leading `cols x cols` block.
    pub fn upper_triangle(&self) -> Matrix {
        let n = self.cols;
        Matrix::from_fn(
            n.min(self.rows),
            n,
            |i, j| if i <= j { self[(i, j)] } else { 0.0 },
        )
    }

    /// Flips row signs so the diagonal is nonnegative.
    pub fn normalize_row_signs(&mut self) {
        for i in 0..self.rows.min(self.cols) {
            if self[(i, i)] < 0.0 {
                for j in 0..self.cols {
                    self[(i, j)] = -self[(i, j)];
                }
            }
        }
    }

    pub fn with_nonnegative_diagonal(&self) -> Matrix {
        let mut r = self.clone();
        r.normalize_row_signs();
        r
    }

    /// Column-wise packing of the upper triangle, `n(n+1)/2` words.
    pub fn pack_upper(&self) -> Vec<f64> {
        let n = self.cols;
        let mut out = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            out.extend_from_slice(&self.col(j)[..=j.min(self.rows - 1)]);
        }
        out
    }

    pub fn unpack_upper(n: usize, packed: &[f64]) -> Result<Matrix> {
        if packed.len() != n * (n + 1) / 2 {
            return Err(Error::dim(format!(
                "packed triangle of order {n} needs {} words, got {}",
                n * (n + 1) / 2,
                packed.len()
            )));
        }
        let mut out = Matrix::zeros(n, n);
        let mut at = 0;
        for j in 0..n {
            out.col_mut(j)[..=j].copy_from_slice(&packed[at..at + j + 1]);
            at += j + 1;
        }
        Ok(out)
    }

    /// `‖selfᵀ self − I‖_F`.
    pub fn orthogonality_loss(&self) -> f64 {
        let g = self.tr_matmul(self).expect("square Gram matrix");
        let mut acc = 0.0;
        for j in 0..g.cols {
            for i in 0..g.rows {
                let d = g[(i, j)] - if i == j { 1.0 } else { 0.0 };
                acc += d * d;
            }
        }
        acc.sqrt()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm with scaling, safe against overflow for huge entries.
pub(crate) fn frobenius(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

fn normalize(x: &mut [f64]) {
    let nrm = frobenius(x);
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_of_identity_and_zero() {
        assert!((Matrix::identity(3).frobenius_norm() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(Matrix::zeros(4, 2).frobenius_norm(), 0.0);
    }

    #[test]
    fn two_norm_of_diagonal() {
        let a = Matrix::from_row_major(2, 2, &[3.0, 0.0, 0.0, 4.0]).unwrap();
        let s = a.two_norm_estimate();
        assert!((s - 4.0).abs() <= 1e-6 * 4.0, "{s}");
    }

    #[test]
    fn two_norm_of_zero_matrix() {
        assert_eq!(Matrix::zeros(3, 3).two_norm_estimate(), 0.0);
    }

    #[test]
    fn packed_triangle_round_trip() {
        let r = Matrix::from_fn(4, 4, |i, j| {
            if i <= j {
                (i * 4 + j) as f64 + 1.0
            } else {
                0.0
            }
        });
        let p = r.pack_upper();
        assert_eq!(p.len(), 10);
        assert_eq!(Matrix::unpack_upper(4, &p).unwrap(), r);
    }

    #[test]
    fn gather_scatter_are_inverse() {
        let a = Matrix::from_fn(10, 3, |i, j| (i * 3 + j) as f64);
        let ranges = [2..4, 7..10];
        let g = a.gather_rows(&ranges);
        assert_eq!(g.rows(), 5);
        assert_eq!(g[(2, 1)], a[(7, 1)]);
        let mut b = Matrix::zeros(10, 3);
        b.scatter_rows(&ranges, &g);
        assert_eq!(b[(8, 2)], a[(8, 2)]);
        assert_eq!(b[(0, 0)], 0.0);
    }

    #[test]
    fn constructor_length_mismatch() {
        assert!(Matrix::from_col_major(2, 2, vec![1.0; 3]).is_err());
    }
}
