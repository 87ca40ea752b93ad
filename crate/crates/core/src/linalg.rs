//! Thin wrappers around the dense LAPACK kernels used across the crate.
//!
//! Every inverse in the crate is a linear solve guarded by a condition-number
//! gate of [`CONDITION_GATE`]; singular systems are reported, never silently
//! regularized.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{Determinant, Eigh, LeastSquaresSvd, Solve, SVD, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition-number gate applied to every solve in the crate.
pub const CONDITION_GATE: f64 = 1e12;

pub fn identity(n: usize) -> Array2<Complex64> {
    Array2::eye(n)
}

pub fn frobenius(m: &ArrayView2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &Array1<Complex64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative difference between two vectors, floored at an absolute scale of 1.
pub fn rel_diff_vec(a: &Array1<Complex64>, b: &Array1<Complex64>) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    diff / vec_norm(a).max(1e-300).max(vec_norm(b)).max(f64::MIN_POSITIVE)
}

pub fn rel_diff_mat(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let diff = frobenius(&(a - b).view());
    diff / frobenius(&a.view()).max(frobenius(&b.view())).max(f64::MIN_POSITIVE)
}

/// `‖M − M^H‖_F`.
pub fn hermitian_deviation(m: &ArrayView2<Complex64>) -> f64 {
    let mh = m.t().mapv(|z| z.conj());
    frobenius(&(m.to_owned() - &mh).view())
}

/// `(M + M^H) / 2`.
pub fn hermitian_part(m: &Array2<Complex64>) -> Array2<Complex64> {
    let mh = m.t().mapv(|z| z.conj());
    (m + &mh).mapv(|z| z * 0.5)
}

pub fn conj_transpose(m: &ArrayView2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|z| z.conj())
}

/// Rows of `a` at the given 1-based indices, in pick order.
pub fn gather_rows(a: &ArrayView2<Complex64>, picks: &[usize]) -> Array2<Complex64> {
    let idx: Vec<usize> = picks.iter().map(|&p| p - 1).collect();
    a.select(Axis(0), &idx)
}

/// Entries of `v` at the given 1-based indices, in pick order.
pub fn gather_entries(v: &Array1<Complex64>, picks: &[usize]) -> Array1<Complex64> {
    Array1::from_iter(picks.iter().map(|&p| v[p - 1]))
}

/// Singular values, descending.
pub fn singular_values(a: &Array2<Complex64>) -> Result<Array1<f64>> {
    let (_, s, _) = a
        .svd(false, false)
        .map_err(|e| Error::SchemaMismatch(format!("svd failed: {e}")))?;
    Ok(s)
}

/// 2-norm condition number; infinite when the smallest singular value is 0.
pub fn condition_number(a: &Array2<Complex64>) -> Result<f64> {
    let s = singular_values(a)?;
    let smax = s.iter().cloned().fold(0.0_f64, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

/// Numerical rank with threshold `max(m, n) * eps * sigma_max`.
pub fn numerical_rank(a: &Array2<Complex64>) -> Result<usize> {
    let s = singular_values(a)?;
    let smax = s.iter().cloned().fold(0.0_f64, f64::max);
    let dim = a.nrows().max(a.ncols()) as f64;
    let tol = dim * f64::EPSILON * smax;
    Ok(s.iter().filter(|&&x| x > tol).count())
}

/// Square solve with the condition gate. Returns the solution and cond(A).
pub fn solve_gated(a: &Array2<Complex64>, b: &Array1<Complex64>) -> Result<(Array1<Complex64>, f64)> {
    let cond = condition_number(a)?;
    if !cond.is_finite() || cond > CONDITION_GATE {
        return Err(Error::SingularSystem { condition: cond });
    }
    let x = a
        .solve(b)
        .map_err(|_| Error::SingularSystem { condition: cond })?;
    Ok((x, cond))
}

/// Square multi-RHS solve with the condition gate: `A X = B`.
pub fn solve_mat_gated(
    a: &Array2<Complex64>,
    b: &Array2<Complex64>,
) -> Result<(Array2<Complex64>, f64)> {
    let cond = condition_number(a)?;
    if !cond.is_finite() || cond > CONDITION_GATE {
        return Err(Error::SingularSystem { condition: cond });
    }
    let mut x = Array2::zeros(b.raw_dim());
    for (j, col) in b.axis_iter(Axis(1)).enumerate() {
        let xi = a
            .solve(&col.to_owned())
            .map_err(|_| Error::SingularSystem { condition: cond })?;
        x.column_mut(j).assign(&xi);
    }
    Ok((x, cond))
}

/// Minimum-norm least squares via SVD.
pub fn lstsq(a: &Array2<Complex64>, b: &Array1<Complex64>) -> Result<Array1<Complex64>> {
    let res = a
        .least_squares(b)
        .map_err(|e| Error::SchemaMismatch(format!("least squares failed: {e}")))?;
    Ok(res.solution)
}

/// Thin SVD `A = U diag(s) V^H` with `U` m x r and `V^H` r x n, r = min(m, n),
/// singular values descending.
pub fn svd_parts(
    a: &Array2<Complex64>,
) -> Result<(Array2<Complex64>, Array1<f64>, Array2<Complex64>)> {
    let (u, s, vt) = a
        .svd(true, true)
        .map_err(|e| Error::SchemaMismatch(format!("svd failed: {e}")))?;
    let u = u.expect("requested U");
    let vt = vt.expect("requested V^T");
    let r = s.len();
    let u = u.slice(ndarray::s![.., ..r]).to_owned();
    let vt = vt.slice(ndarray::s![..r, ..]).to_owned();
    Ok((u, s, vt))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Depending on the memory layout handed to LAPACK, `eigh` can come back
/// with the eigenvectors of `conj(M)` instead of `M`; both reconstructions
/// are tried and the one that matches the input is kept.
pub fn hermitian_eigen(m: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let sym = hermitian_part(m);
    let (vals, vecs) = sym
        .eigh(UPLO::Lower)
        .map_err(|e| Error::SchemaMismatch(format!("hermitian eigen failed: {e}")))?;
    let reconstruct = |v: &Array2<Complex64>| {
        let scaled = v * &vals.mapv(|x| Complex64::new(x, 0.0));
        scaled.dot(&conj_transpose(&v.view()))
    };
    let direct = frobenius(&(&reconstruct(&vecs) - &sym).view());
    let conj_vecs = vecs.mapv(|z| z.conj());
    let flipped = frobenius(&(&reconstruct(&conj_vecs) - &sym).view());
    if flipped < direct {
        Ok((vals, conj_vecs))
    } else {
        Ok((vals, vecs))
    }
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn hermitian_lambda_max(m: &Array2<Complex64>) -> Result<f64> {
    let (vals, _) = hermitian_eigen(m)?;
    Ok(vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// `M^(-1/2)` for Hermitian positive-definite `M`.
pub fn inv_sqrt_psd(m: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let vmax = vals.iter().cloned().fold(0.0_f64, f64::max);
    let floor = vmax.max(1.0) * 1e-300;
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= floor || (vmax.is_finite() && vmax / min > CONDITION_GATE) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let scaled = &vecs * &vals.mapv(|v| Complex64::new(1.0 / v.sqrt(), 0.0));
    Ok(scaled.dot(&conj_transpose(&vecs.view())))
}

/// `M^(1/2)` for Hermitian positive-semidefinite `M`. Eigenvalues below
/// `-1e-10 * max(1, lambda_max)` are rejected; small negatives inside that
/// floor are clamped to zero.
pub fn psd_sqrt(m: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let vmax = vals.iter().cloned().fold(0.0_f64, f64::max).max(1.0);
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * vmax {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let scaled = &vecs * &vals.mapv(|v| Complex64::new(v.max(0.0).sqrt(), 0.0));
    Ok(scaled.dot(&conj_transpose(&vecs.view())))
}

pub fn det(a: &Array2<Complex64>) -> Result<Complex64> {
    a.det()
        .map_err(|e| Error::SchemaMismatch(format!("determinant failed: {e}")))
}
