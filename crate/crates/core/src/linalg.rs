//! Small dense linear-algebra helpers on top of nalgebra.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{OlexError, Result};
use crate::Matrix;

/// Relative eigenvalue floor for the SPD check: `λ_min > SPD_REL_TOL · λ_max`.
pub const SPD_REL_TOL: f64 = 1e-12;

/// Γ(n/2) for a positive integer n.
fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of the unit sphere S^{n−1}.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Volume ω_n of the unit ball in R^n.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `out = m · x`.
pub fn mat_vec_into(m: &Matrix, x: &[f64], out: &mut [f64]) {
    let n = m.nrows();
    for (i, o) in out.iter_mut().enumerate().take(n) {
        let mut s = 0.0;
        for (j, xj) in x.iter().enumerate() {
            s += m[(i, j)] * xj;
        }
        *o = s;
    }
}

pub fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    mat_vec_into(m, x, &mut out);
    out
}

/// `xᵗ m x`.
pub fn quad_form(m: &Matrix, x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut r = 0.0;
        for j in 0..n {
            r += m[(i, j)] * x[j];
        }
        s += x[i] * r;
    }
    s
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn frobenius_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.component_mul(b).sum()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(OlexError::Config(format!(
            "expected a square matrix, got {} rows of lengths {:?}",
            n,
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Symmetric eigendecomposition after symmetrization. Eigenvalues are sorted
/// ascending together with their eigenvectors so results are reproducible.
pub fn sym_eigen(m: &Matrix) -> (Vec<f64>, Matrix) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).clone_owned();
        // sign convention: largest-magnitude component positive
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col = -col;
        }
        vectors.set_column(k, &col);
    }
    (values, vectors)
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let (vals, vecs) = sym_eigen(m);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.into_iter().map(f),
    ));
    symmetrize(&(&vecs * d * vecs.transpose()))
}

/// Matrix exponential of a symmetric matrix.
pub fn expm_sym(s: &Matrix) -> Matrix {
    sym_apply(s, f64::exp)
}

pub fn is_spd(m: &Matrix) -> bool {
    let (vals, _) = sym_eigen(m);
    let max = vals.last().copied().unwrap_or(0.0);
    let min = vals.first().copied().unwrap_or(0.0);
    max > 0.0 && min > SPD_REL_TOL * max && vals.iter().all(|v| v.is_finite())
}

/// Inverse of an invertible square matrix, rejecting numerically singular input.
pub fn checked_inverse(t: &Matrix, what: &str) -> Result<Matrix> {
    let n = t.nrows();
    if t.ncols() != n {
        return Err(OlexError::Domain(format!("{what}: matrix is not square")));
    }
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let det = t.determinant();
    if !det.is_finite() || det.abs() <= 1e-14 * scale.powi(n as i32) {
        return Err(OlexError::Domain(format!("{what}: matrix is singular (det = {det:e})")));
    }
    t.clone()
        .try_inverse()
        .ok_or_else(|| OlexError::Domain(format!("{what}: matrix is singular")))
}

/// Frobenius-orthonormal basis of the symmetric trace-free n×n matrices,
/// of size n(n+1)/2 − 1. Diagonal elements use a Helmert-type basis.
pub fn trace_free_basis(n: usize) -> Vec<Matrix> {
    let mut basis = Vec::with_capacity(n * (n + 1) / 2 - 1);
    for k in 1..n {
        let mut m = DMatrix::zeros(n, n);
        let c = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            m[(i, i)] = c;
        }
        m[(k, k)] = -(k as f64) * c;
        basis.push(m);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = s;
            m[(j, i)] = s;
            basis.push(m);
        }
    }
    basis
}

/// Combination Σ c_j B_j of basis matrices.
pub fn combine(basis: &[Matrix], coeffs: &[f64]) -> Matrix {
    let n = basis[0].nrows();
    let mut m = DMatrix::zeros(n, n);
    for (b, c) in basis.iter().zip(coeffs) {
        m += b * *c;
    }
    m
}

/// Rescales `a` to unit determinant, requiring det > 0.
pub fn det_normalize(a: &Matrix) -> Result<Matrix> {
    let det = a.determinant();
    if !(det > 0.0) || !det.is_finite() {
        return Err(OlexError::Numeric(format!("cannot det-normalize matrix with det {det:e}")));
    }
    Ok(a / det.powf(1.0 / a.nrows() as f64))
}

/// Relative Frobenius distance ‖a − b‖ / ‖b‖.
pub fn rel_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).norm() / b.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_constants() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((ball_volume(5) - 8.0 * PI * PI / 15.0).abs() < 1e-13);
    }

    #[test]
    fn trace_free_basis_is_orthonormal() {
        for n in 2..5 {
            let b = trace_free_basis(n);
            assert_eq!(b.len(), n * (n + 1) / 2 - 1);
            for (i, bi) in b.iter().enumerate() {
                assert!(bi.trace().abs() < 1e-15);
                assert_eq!(bi, &bi.transpose());
                for (j, bj) in b.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((frobenius_inner(bi, bj) - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn expm_of_trace_free_has_unit_det() {
        let b = trace_free_basis(3);
        let s = combine(&b, &[0.3, -0.2, 0.5, 0.1, -0.7]);
        assert!((expm_sym(&s).determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_inverse_rejected() {
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(checked_inverse(&t, "t"), Err(OlexError::Domain(_))));
    }
}
