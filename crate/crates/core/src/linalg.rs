//! Small dense kernels on top of nalgebra: column submatrices, extreme
//! singular values and SVD-based least squares.

use nalgebra::{DMatrix, DVector};

/// Columns of `a` selected by `idx`, in the given order.
pub fn columns(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])])
}

/// Smallest and largest singular value of `b`, treating `b` as a set of
/// `b.ncols()` columns: when there are more columns than rows the columns are
/// dependent and the smallest value is reported as 0.
pub fn extreme_singular_values(b: &DMatrix<f64>) -> (f64, f64) {
    if b.ncols() == 0 {
        return (1.0, 1.0);
    }
    let sv = b.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = if b.ncols() > b.nrows() {
        0.0
    } else {
        sv.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    (min, max)
}

/// Whether the columns of `b` are numerically dependent: `sigma_min <= tol * sigma_max`.
pub fn is_column_dependent(b: &DMatrix<f64>, tol: f64) -> bool {
    if b.ncols() == 0 {
        return false;
    }
    if b.ncols() > b.nrows() {
        return true;
    }
    let (lo, hi) = extreme_singular_values(b);
    lo <= tol * hi
}

/// Least-squares fit of `x` by the columns of `b` through a thin SVD.
///
/// Returns `None` when the columns are numerically dependent
/// (`sigma_min <= tol * sigma_max`), since the minimizer is then not unique.
pub fn lstsq(b: &DMatrix<f64>, x: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
    let j = b.ncols();
    if j == 0 {
        return Some(DVector::zeros(0));
    }
    if j > b.nrows() {
        return None;
    }
    let svd = b.clone().svd(true, true);
    let sv = &svd.singular_values;
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo <= tol * hi {
        return None;
    }
    let u = svd.u.as_ref()?;
    let v_t = svd.v_t.as_ref()?;
    let mut proj = u.tr_mul(x);
    for (p, s) in proj.iter_mut().zip(sv.iter()) {
        *p /= s;
    }
    Some(v_t.tr_mul(&proj))
}

/// Euclidean norm of `x - a s`.
pub fn residual_norm(a: &DMatrix<f64>, s: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (x - a * s).norm()
}

/// Moore-Penrose pseudo-inverse through the SVD, with relative cutoff `tol`.
pub fn pseudo_inverse(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    let hi = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.pseudo_inverse(tol * hi.max(f64::MIN_POSITIVE))
        .expect("u and v_t were requested")
}
