//! Smoothed-l0 solvers.
//!
//! Both maximize `sum_i exp(-s_i^2 / (2 sigma^2))` for a geometrically
//! decreasing `sigma`, starting from the minimum-l2 solution `A^+ x`. Each
//! level takes `inner_steps` steps `s <- s - mu * s .* exp(-s^2 / (2 sigma^2))`,
//! each followed by a projection:
//!
//! * `sl0`: onto the affine set `A s = x`, via `s <- s - A^+ (A s - x)`;
//! * `robust_sl0`: toward that set along the same direction, stopping on the
//!   boundary `||x - A s||_2 = delta` (no move when already inside).
//!
//! Entries below the last `sigma` are then dropped and the rest refit by
//! least squares, unless that breaks the constraint.

use nalgebra::DVector;

use super::{check_signal, finalize, pinv, SolverConfig, SparseSolution};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg;

pub fn sl0(dict: &Dictionary, x: &DVector<f64>, config: &SolverConfig) -> Result<SparseSolution> {
    run(dict, x, None, config)
}

pub fn robust_sl0(dict: &Dictionary, x: &DVector<f64>, delta: f64, config: &SolverConfig) -> Result<SparseSolution> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    run(dict, x, Some(delta), config)
}

fn run(dict: &Dictionary, x: &DVector<f64>, delta: Option<f64>, config: &SolverConfig) -> Result<SparseSolution> {
    config.validate()?;
    check_signal(dict, x)?;
    let name = if delta.is_some() { "robust_sl0" } else { "sl0" };
    let m = dict.m();
    let slack = delta.unwrap_or(0.0);
    let xnorm = x.norm();
    if xnorm <= slack || xnorm == 0.0 {
        // the zero vector is feasible and has no nonzero entries
        return Ok(SparseSolution::from_dense(dict, x, DVector::zeros(m), name, 0, true));
    }

    let a = dict.matrix();
    let a_pinv = pinv(a);
    let p = config.sl0;
    let mut s = &a_pinv * x;
    let project = |s: &mut DVector<f64>| {
        let r = a * &*s - x;
        match delta {
            None => *s -= &a_pinv * r,
            Some(d) => {
                let rn = r.norm();
                if rn > d {
                    *s -= &a_pinv * r * (1.0 - d / rn);
                }
            }
        }
    };

    let sigma0 = p.sigma0_scale * s.amax();
    let sigma_min = p.sigma_floor.max(sigma0 * slack / xnorm);
    let mut sigma = sigma0;
    let mut iterations = 0;
    while sigma >= sigma_min && iterations < config.max_iterations {
        let two_sigma2 = 2.0 * sigma * sigma;
        for _ in 0..p.inner_steps {
            let grad = s.map(|v| v * (-v * v / two_sigma2).exp());
            s -= grad * p.step_scale;
            project(&mut s);
            iterations += 1;
        }
        sigma *= p.sigma_decay;
    }

    let raw_res = linalg::residual_norm(a, &s, x);
    if raw_res > slack + super::FEASIBILITY_TOL {
        return Err(Error::NotConverged {
            solver: name.into(),
            message: format!("residual {raw_res:e} violates the constraint (is x in the span of A?)"),
        });
    }
    // entries below the last smoothing scale are indistinguishable from zero
    // under the smoothed measure; try that support first
    let scale = sigma / p.sigma_decay;
    let pruned = s.map(|v| if v.abs() < scale { 0.0 } else { v });
    let mut sol = finalize(dict, x, pruned, slack, config, name, iterations);
    if !sol.converged {
        sol = finalize(dict, x, s, slack, config, name, iterations);
    }
    if !sol.converged {
        return Err(Error::NotConverged {
            solver: name.into(),
            message: format!("residual {:e} above tolerance after truncation", sol.residual_norm),
        });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_unique_representation() {
        let d = Dictionary::dirac_hadamard(4).unwrap();
        let h = Dictionary::from_matrix(d.matrix().columns(4, 4).into_owned(), "h4").unwrap();
        let s = sl0(&h, &h.atom(1), &SolverConfig::default()).unwrap();
        let mut e = DVector::zeros(4);
        e[1] = 1.0;
        assert!((s.coefficients - e).amax() < 1e-6);
    }

    #[test]
    fn recovers_two_sparse() {
        let d = Dictionary::random_gaussian(8, 12, 9).unwrap();
        let x = d.atom(2) * 1.1 - d.atom(10) * 0.6;
        let s = sl0(&d, &x, &SolverConfig::default()).unwrap();
        assert_eq!(s.support, vec![2, 10]);
        assert!(s.residual_norm <= 1e-8);
    }

    #[test]
    fn robust_zero_when_ball_contains_origin() {
        let d = Dictionary::random_gaussian(8, 12, 9).unwrap();
        let x = d.atom(2) * 0.1;
        let s = robust_sl0(&d, &x, 0.2, &SolverConfig::default()).unwrap();
        assert_eq!(s.l0(), 0);
    }

    #[test]
    fn robust_respects_delta() {
        let d = Dictionary::random_gaussian(8, 12, 9).unwrap();
        let noise = DVector::from_fn(8, |i, _| 0.01 * ((i * 7) as f64).cos());
        let x = d.atom(2) * 1.1 - d.atom(10) * 0.6 + &noise;
        let delta = 2.0 * noise.norm();
        let s = robust_sl0(&d, &x, delta, &SolverConfig::default()).unwrap();
        assert!(s.residual_norm <= delta + 1e-8);
        assert!(s.support.contains(&2) && s.support.contains(&10));
    }
}
