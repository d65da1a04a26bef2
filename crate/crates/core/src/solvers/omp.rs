use nalgebra::DVector;

use super::{check_signal, finalize, SolverConfig, SparseSolution};
use crate::dictionary::Dictionary;
use crate::error::Result;
use crate::linalg;

/// Relative margin under which two correlations count as tied; ties go to
/// the lowest atom index.
const TIE_TOL: f64 = 1e-12;

/// Orthogonal matching pursuit.
///
/// Each step adds the atom most correlated with the residual and refits all
/// selected atoms by least squares. Stops when the residual norm reaches
/// `omp.residual_target` (default `max(delta, zero_tol)`) or `omp.max_atoms`
/// (default `n`) atoms are selected. Never fails on a valid input: the
/// `converged` flag tells whether the residual target was met.
pub fn omp(dict: &Dictionary, x: &DVector<f64>, config: &SolverConfig) -> Result<SparseSolution> {
    config.validate()?;
    check_signal(dict, x)?;
    let a = dict.matrix();
    let (n, m) = (dict.n(), dict.m());
    let target = config
        .omp
        .residual_target
        .unwrap_or_else(|| config.delta.max(config.zero_tol(x)));
    let max_atoms = config.omp.max_atoms.unwrap_or(n).min(m);

    let mut selected: Vec<usize> = Vec::new();
    let mut coeffs = DVector::zeros(0);
    let mut residual = x.clone();
    let mut iterations = 0;
    while residual.norm() > target && selected.len() < max_atoms {
        let corr = a.tr_mul(&residual);
        let best = (0..m)
            .filter(|j| !selected.contains(j))
            .map(|j| corr[j].abs())
            .fold(0.0, f64::max);
        if best <= f64::EPSILON * x.norm() {
            break;
        }
        let pick = (0..m)
            .find(|j| !selected.contains(j) && corr[*j].abs() >= best * (1.0 - TIE_TOL))
            .expect("maximum is attained");
        selected.push(pick);
        iterations += 1;
        let b = linalg::columns(a, &selected);
        match linalg::lstsq(&b, x, config.rank_tolerance) {
            Some(c) => {
                residual = x - &b * &c;
                coeffs = c;
            }
            None => {
                selected.pop();
                break;
            }
        }
    }

    let mut s = DVector::zeros(m);
    for (&i, &v) in selected.iter().zip(coeffs.iter()) {
        s[i] = v;
    }
    let reached = residual.norm();
    let mut sol = finalize(dict, x, s, reached.max(target), config, "omp", iterations);
    sol.converged = sol.residual_norm <= target + super::FEASIBILITY_TOL;
    Ok(sol)
}
