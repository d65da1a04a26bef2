//! Oracles shared by the integration tests. They deliberately avoid the
//! library's SVD-based routines: rank comes from Gaussian elimination with
//! full pivoting, smallest singular values from Gram-matrix eigenvalues.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use sparse_stability::subsets::Subsets;
use sparse_stability::Dictionary;

/// Numerical rank by full-pivot elimination; pivots below `tol * max|b|` count as zero.
pub fn rank_lu(b: &DMatrix<f64>, tol: f64) -> usize {
    let mut a = b.clone();
    let (rows, cols) = a.shape();
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0);
        for i in step..rows {
            for j in step..cols {
                if a[(i, j)].abs() > best.2 {
                    best = (i, j, a[(i, j)].abs());
                }
            }
        }
        if best.2 <= tol * scale {
            break;
        }
        a.swap_rows(step, best.0);
        a.swap_columns(step, best.1);
        for i in step + 1..rows {
            let f = a[(i, step)] / a[(step, step)];
            for j in step..cols {
                let v = a[(step, j)];
                a[(i, j)] -= f * v;
            }
        }
        rank += 1;
    }
    rank
}

fn columns(d: &Dictionary, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(d.n(), idx.len(), |r, c| d.matrix()[(r, idx[c])])
}

/// Smallest subset size whose columns are rank deficient, or `None`.
pub fn naive_spark(d: &Dictionary, tol: f64) -> Option<usize> {
    (1..=d.m()).find(|&size| Subsets::new(d.m(), size).any(|idx| rank_lu(&columns(d, &idx), tol) < size))
}

/// `min over j-subsets of sqrt(lambda_min(B'B))`.
pub fn sigma_min_eig(d: &Dictionary, j: usize) -> f64 {
    Subsets::new(d.m(), j)
        .map(|idx| {
            let b = columns(d, &idx);
            let ev = SymmetricEigen::new(b.tr_mul(&b)).eigenvalues;
            ev.min().max(0.0).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}
