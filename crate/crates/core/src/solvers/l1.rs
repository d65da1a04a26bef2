//! l1 minimization: the equality-constrained problem as a linear program,
//! the noise-aware problem by following the LASSO homotopy path down to the
//! point where the residual reaches `delta`, and a basic-solution enumerator
//! used as an independent oracle.

use nalgebra::{DMatrix, DVector};

use super::lp::{solve_standard_form, LpError};
use super::{check_signal, finalize, SolverConfig, SparseSolution, FEASIBILITY_TOL};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg;
use crate::subsets::{binomial, Subsets};

/// Budget on the number of bases the vertex oracle may enumerate.
pub const VERTEX_ORACLE_BUDGET: u128 = 100_000;

/// `min ||s||_1  s.t.  A s = x`, solved exactly as the LP
/// `min 1'(u + v)  s.t.  A (u - v) = x,  u, v >= 0`.
pub fn l1_eq(dict: &Dictionary, x: &DVector<f64>, config: &SolverConfig) -> Result<SparseSolution> {
    l1_eq_named(dict, x, config, "l1_eq")
}

fn l1_eq_named(dict: &Dictionary, x: &DVector<f64>, config: &SolverConfig, name: &str) -> Result<SparseSolution> {
    config.validate()?;
    check_signal(dict, x)?;
    let a = dict.matrix();
    let (n, m) = (dict.n(), dict.m());
    let mut split = DMatrix::zeros(n, 2 * m);
    split.view_mut((0, 0), (n, m)).copy_from(a);
    split.view_mut((0, m), (n, m)).copy_from(&(-a));
    let cost = vec![1.0; 2 * m];
    let lp = solve_standard_form(&split, x, &cost, config.max_iterations).map_err(|e| match e {
        LpError::Infeasible(r) => Error::Infeasible { residual: r },
        LpError::Unbounded => Error::NotConverged {
            solver: name.into(),
            message: "linear program reported unbounded".into(),
        },
        LpError::IterationLimit => Error::NotConverged {
            solver: name.into(),
            message: format!("iteration limit {} reached", config.max_iterations),
        },
    })?;
    let raw = DVector::from_fn(m, |i, _| lp.y[i] - lp.y[m + i]);

    // polish the vertex: the basic columns are independent, so least squares
    // on the support reproduces it to working precision
    let support: Vec<usize> = (0..m).filter(|&i| raw[i] != 0.0).collect();
    let polished = if support.len() <= n {
        linalg::lstsq(&linalg::columns(a, &support), x, config.rank_tolerance).map(|c| {
            let mut s = DVector::zeros(m);
            for (&i, v) in support.iter().zip(c.iter()) {
                s[i] = *v;
            }
            s
        })
    } else {
        None
    }
    .filter(|s| linalg::residual_norm(a, s, x) <= linalg::residual_norm(a, &raw, x).max(FEASIBILITY_TOL));
    let sol = finalize(dict, x, polished.unwrap_or(raw), 0.0, config, name, lp.iterations);
    if !sol.converged {
        return Err(Error::NotConverged {
            solver: name.into(),
            message: format!("residual {:e} above feasibility tolerance", sol.residual_norm),
        });
    }
    Ok(sol)
}

/// `min ||s||_1  s.t.  ||x - A s||_2 <= delta`.
///
/// Follows the piecewise-linear LASSO path `min 1/2 ||x - A s||^2 + lambda ||s||_1`
/// from `lambda = ||A'x||_inf` downwards; the residual norm decreases along the
/// path, and the solution at the first point where it equals `delta` is the
/// constrained minimizer. `delta = 0` is delegated to [`l1_eq`].
pub fn l1_delta(dict: &Dictionary, x: &DVector<f64>, delta: f64, config: &SolverConfig) -> Result<SparseSolution> {
    config.validate()?;
    check_signal(dict, x)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    let name = "l1_delta";
    if x.norm() <= delta {
        return Ok(SparseSolution::from_dense(
            dict,
            x,
            DVector::zeros(dict.m()),
            name,
            0,
            true,
        ));
    }
    if delta == 0.0 {
        return l1_eq_named(dict, x, config, name);
    }
    let (raw, iterations) = homotopy(dict, x, delta, config.max_iterations)?;
    let sol = finalize(dict, x, raw, delta, config, name, iterations);
    if !sol.converged {
        return Err(Error::NotConverged {
            solver: name.into(),
            message: format!("residual {:e} exceeds delta {delta:e}", sol.residual_norm),
        });
    }
    Ok(sol)
}

fn not_converged(message: impl Into<String>) -> Error {
    Error::NotConverged {
        solver: "l1_delta".into(),
        message: message.into(),
    }
}

/// LASSO homotopy down to residual `delta`. Returns the dense coefficients
/// and the number of path segments.
fn homotopy(dict: &Dictionary, x: &DVector<f64>, delta: f64, limit: usize) -> Result<(DVector<f64>, usize)> {
    let a = dict.matrix();
    let m = dict.m();
    let corr0 = a.tr_mul(x);
    let mut lambda = corr0.amax();
    let lambda0 = lambda;
    let tiny = 1e-12 * lambda0;

    // active set with signs, kept sorted by index
    let mut active: Vec<(usize, f64)> = Vec::new();
    let first = (0..m)
        .find(|&j| corr0[j].abs() >= lambda * (1.0 - 1e-12))
        .expect("nonzero correlation");
    active.push((first, corr0[first].signum()));

    for step in 0..limit {
        let idx: Vec<usize> = active.iter().map(|p| p.0).collect();
        let z = DVector::from_iterator(active.len(), active.iter().map(|p| p.1));
        let b = linalg::columns(a, &idx);
        let chol = b
            .tr_mul(&b)
            .cholesky()
            .ok_or_else(|| not_converged("active atoms became linearly dependent"))?;
        let s_act = chol.solve(&(b.tr_mul(x) - &z * lambda));
        let dir = chol.solve(&z);
        let r = x - &b * &s_act;
        let v = &b * &dir;
        let c = a.tr_mul(&r);
        let w = a.tr_mul(&v);

        // atoms already at the correlation boundary and about to violate it join now
        let in_active = |j: usize| active.iter().any(|p| p.0 == j);
        if let Some(j) = (0..m)
            .find(|&j| !in_active(j) && c[j].abs() >= lambda - 1e-10 * lambda0 && c[j].signum() * w[j] < 1.0 - 1e-10)
        {
            insert_sorted(&mut active, j, c[j].signum());
            continue;
        }

        let mut gamma = lambda;
        let mut event = Event::End;
        for j in 0..m {
            if in_active(j) {
                continue;
            }
            for (num, den, sign) in [(lambda - c[j], 1.0 - w[j], 1.0), (lambda + c[j], 1.0 + w[j], -1.0)] {
                if den > 1e-14 {
                    let t = num / den;
                    if t > tiny && t < gamma {
                        gamma = t;
                        event = Event::Join(j, sign);
                    }
                }
            }
        }
        for (pos, (_, _)) in active.iter().enumerate() {
            if dir[pos] != 0.0 {
                let t = -s_act[pos] / dir[pos];
                if t > tiny && t < gamma {
                    gamma = t;
                    event = Event::Drop(pos);
                }
            }
        }

        // does the residual reach delta within this segment?
        let end_res = (&r - &v * gamma).norm();
        if end_res <= delta {
            // ||r - t v||^2 = delta^2, smallest root in [0, gamma]
            let vv = v.norm_squared();
            let rv = r.dot(&v);
            let rr = r.norm_squared();
            let disc = (rv * rv - vv * (rr - delta * delta)).max(0.0);
            let t = if vv > 0.0 {
                ((rv - disc.sqrt()) / vv).clamp(0.0, gamma)
            } else {
                0.0
            };
            let mut s = DVector::zeros(m);
            for (pos, &i) in idx.iter().enumerate() {
                s[i] = s_act[pos] + t * dir[pos];
            }
            return Ok((s, step + 1));
        }

        lambda -= gamma;
        match event {
            Event::End => {
                return Err(Error::Infeasible { residual: end_res });
            }
            Event::Join(j, sign) => insert_sorted(&mut active, j, sign),
            Event::Drop(pos) => {
                active.remove(pos);
                if active.is_empty() {
                    return Err(not_converged("active set emptied"));
                }
            }
        }
    }
    Err(not_converged(format!("path not completed within {limit} segments")))
}

enum Event {
    End,
    Join(usize, f64),
    Drop(usize),
}

fn insert_sorted(active: &mut Vec<(usize, f64)>, j: usize, sign: f64) {
    let pos = active.partition_point(|p| p.0 < j);
    active.insert(pos, (j, sign));
}

/// Enumerates every `n`-column basis, solves the square system and keeps
/// the basic solution of least l1 norm (ties: lexicographically smallest
/// basis). An l1 minimizer of the equality-constrained problem is attained at
/// such a basic solution whenever `rank(A) = n`.
pub fn l1_vertex_oracle(dict: &Dictionary, x: &DVector<f64>, config: &SolverConfig) -> Result<SparseSolution> {
    check_signal(dict, x)?;
    let (n, m) = (dict.n(), dict.m());
    if m < n {
        return Err(Error::PreconditionViolated(format!(
            "vertex oracle needs rank(A) = n, but m = {m} < n = {n}"
        )));
    }
    let required = binomial(m, n);
    if required > VERTEX_ORACLE_BUDGET {
        return Err(Error::BudgetExceeded {
            required,
            budget: VERTEX_ORACLE_BUDGET,
        });
    }
    let a = dict.matrix();
    let feas = FEASIBILITY_TOL * x.norm().max(1.0);
    let mut best: Option<(f64, Vec<usize>, DVector<f64>)> = None;
    let mut visited = 0;
    for basis in Subsets::new(m, n) {
        visited += 1;
        let b = linalg::columns(a, &basis);
        let Some(c) = linalg::lstsq(&b, x, config.rank_tolerance) else {
            continue;
        };
        if (x - &b * &c).norm() > feas {
            continue;
        }
        let l1: f64 = c.iter().map(|v| v.abs()).sum();
        if best.as_ref().is_none_or(|(bl, _, _)| l1 < bl - 1e-12 * bl.max(1.0)) {
            best = Some((l1, basis, c));
        }
    }
    let (_, basis, c) = best.ok_or_else(|| Error::PreconditionViolated("no nonsingular basis: rank(A) < n".into()))?;
    // degenerate basic variables are zero in exact arithmetic
    let cmax = c.amax();
    let support: Vec<usize> = basis
        .iter()
        .zip(c.iter())
        .filter(|(_, v)| v.abs() > 1e-12 * cmax)
        .map(|(&i, _)| i)
        .collect();
    let coeffs =
        linalg::lstsq(&linalg::columns(a, &support), x, config.rank_tolerance).expect("subset of a nonsingular basis");
    Ok(SparseSolution::from_support(
        dict,
        x,
        &support,
        &coeffs,
        "l1_vertex",
        visited,
    ))
}
