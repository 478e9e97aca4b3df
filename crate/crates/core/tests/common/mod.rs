#![allow(dead_code)]

use nalgebra::DMatrix;
use tsqr::Matrix;

pub const EPS: f64 = f64::EPSILON;

pub fn to_na(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn from_na(a: &DMatrix<f64>) -> Matrix {
    Matrix::from_col_major(a.nrows(), a.ncols(), a.as_slice().to_vec()).unwrap()
}

/// R factor from nalgebra's QR with a nonnegative diagonal.
pub fn oracle_r(a: &Matrix) -> Matrix {
    from_na(&to_na(a).qr().r()).with_nonnegative_diagonal()
}

pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(a)
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

pub fn two_norm(a: &Matrix) -> f64 {
    singular_values(a)[0]
}

pub fn cond(a: &Matrix) -> f64 {
    let s = singular_values(a);
    s[0] / s[s.len() - 1]
}

/// Largest elementwise difference after making both diagonals nonnegative.
pub fn r_distance(r1: &Matrix, r2: &Matrix) -> f64 {
    let a = r1.with_nonnegative_diagonal();
    let b = r2.with_nonnegative_diagonal();
    a.sub(&b).unwrap().max_abs()
}

pub fn residual(a: &Matrix, q: &Matrix, r: &Matrix) -> f64 {
    a.sub(&q.matmul(r).unwrap()).unwrap().frobenius_norm()
}
