//! Dense kernels shared by the stationary solves and the rate-matrix recursion.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Square diagonal matrix from a vector.
pub fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&DVector::from_column_slice(values))
}

/// Row vector times matrix, as a plain vector.
pub fn vec_mul(v: &[f64], m: &Matrix) -> Vec<f64> {
    assert_eq!(v.len(), m.nrows());
    let mut out = vec![0.0; m.ncols()];
    for (j, o) in out.iter_mut().enumerate() {
        let col = m.column(j);
        *o = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
    }
    out
}

pub fn row_sums(m: &Matrix) -> Vec<f64> {
    m.row_iter().map(|r| r.sum()).collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `a * b` for sparse `a`, skipping zero entries.
pub fn sparse_left_mul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.nrows());
    let nonzeros: Vec<(usize, usize, f64)> = (0..a.ncols())
        .flat_map(|k| (0..a.nrows()).map(move |i| (i, k)))
        .filter_map(|(i, k)| {
            let v = a[(i, k)];
            (v != 0.0).then_some((i, k, v))
        })
        .collect();
    let mut out = Matrix::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        let src = b.column(j);
        let mut dst = out.column_mut(j);
        for &(i, k, v) in &nonzeros {
            dst[i] += v * src[k];
        }
    }
    out
}

/// `a * b` for sparse `b`, skipping zero entries.
pub fn sparse_right_mul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Matrix::zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        for k in 0..b.nrows() {
            let bkj = b[(k, j)];
            if bkj != 0.0 {
                let src = a.column(k);
                let mut dst = out.column_mut(j);
                dst.axpy(bkj, &src, 1.0);
            }
        }
    }
    out
}

/// Solves `x * g = 0`, `x * 1 = 1` for a matrix `g` whose rows sum to zero
/// (a generator, or `P - I` for a stochastic `P`).
///
/// The last balance equation is replaced by the normalization and the
/// resulting system is solved by LU with partial pivoting. A singular
/// replaced system means the null space is not one-dimensional; a large
/// residual on the dropped equation means it is empty.
pub fn left_null_vector(g: &Matrix, residual_tol: f64) -> Result<Vec<f64>> {
    let n = g.nrows();
    assert_eq!(n, g.ncols());
    if n == 0 {
        return Err(Error::NoUniqueStationary("empty matrix".into()));
    }
    let mut system = g.transpose();
    for j in 0..n {
        system[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NoUniqueStationary("null space has dimension > 1".into()))?;
    let x: Vec<f64> = x.iter().copied().collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoUniqueStationary("null space has dimension > 1".into()));
    }
    let residual = max_abs(&vec_mul(&x, g));
    let scale = g.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    if residual > residual_tol * scale {
        return Err(Error::NoUniqueStationary(format!(
            "residual {residual:e} exceeds tolerance; null space is empty"
        )));
    }
    Ok(x)
}

/// Perron root estimate of a non-negative matrix by power iteration on row
/// vectors.
pub fn spectral_radius(m: &Matrix, iterations: usize) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = vec_mul(&v, m);
        let norm: f64 = w.iter().map(|x| x.abs()).sum();
        if norm == 0.0 || !norm.is_finite() {
            return 0.0;
        }
        estimate = norm;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    estimate
}
