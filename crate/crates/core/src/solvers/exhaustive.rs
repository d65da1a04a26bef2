//! Combinatorial oracles for P0 and P0,delta: supports enumerated by
//! increasing size, least squares on each, first feasible size wins.

use std::cmp::Ordering;

use nalgebra::DVector;
use rayon::prelude::*;

use super::{check_signal, SolverConfig, SparseSolution};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg;
use crate::subsets::{binomial, Subsets};

/// `min ||s||_0  s.t.  ||x - A s||_2 <= zero_tol`, with
/// `zero_tol = zero_tol_rel * ||x||_2`.
pub fn exhaustive_p0(dict: &Dictionary, x: &DVector<f64>, config: &SolverConfig) -> Result<SparseSolution> {
    config.validate()?;
    check_signal(dict, x)?;
    search(dict, x, config.zero_tol(x), config, "exhaustive_p0")
}

/// `min ||s||_0  s.t.  ||x - A s||_2 <= delta`. The constraint is checked with
/// the same `zero_tol` slack as [`exhaustive_p0`], so `delta = 0` reproduces it.
///
/// Among minimizers of equal size the smallest residual wins, then the
/// lexicographically smallest support.
pub fn exhaustive_p0_delta(
    dict: &Dictionary,
    x: &DVector<f64>,
    delta: f64,
    config: &SolverConfig,
) -> Result<SparseSolution> {
    config.validate()?;
    check_signal(dict, x)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    search(dict, x, delta + config.zero_tol(x), config, "exhaustive_p0_delta")
}

struct Candidate {
    residual: f64,
    support: Vec<usize>,
    coefficients: DVector<f64>,
}

fn better(a: &Candidate, b: &Candidate) -> Ordering {
    a.residual
        .total_cmp(&b.residual)
        .then_with(|| a.support.cmp(&b.support))
}

fn search(dict: &Dictionary, x: &DVector<f64>, tol: f64, config: &SolverConfig, name: &str) -> Result<SparseSolution> {
    let (n, m) = (dict.n(), dict.m());
    let max_support = config.max_support.unwrap_or(n.min(m)).min(m);
    let a = dict.matrix();
    let mut visited: u128 = 0;
    for size in 0..=max_support {
        if size > n {
            // any support larger than n is dependent; its span was covered already
            break;
        }
        let level = binomial(m, size);
        visited = visited.saturating_add(level);
        if visited > config.budget {
            return Err(Error::BudgetExceeded {
                required: visited,
                budget: config.budget,
            });
        }
        let best = if size == 0 {
            let r = x.norm();
            (r <= tol).then(|| Candidate {
                residual: r,
                support: vec![],
                coefficients: DVector::zeros(0),
            })
        } else {
            (0..m)
                .into_par_iter()
                .filter_map(|first| {
                    let mut rest = Subsets::new(m - first - 1, size - 1);
                    let mut idx = vec![first; size];
                    let mut best: Option<Candidate> = None;
                    while rest.advance() {
                        for (slot, r) in idx[1..].iter_mut().zip(rest.current()) {
                            *slot = first + 1 + r;
                        }
                        let b = linalg::columns(a, &idx);
                        let Some(c) = linalg::lstsq(&b, x, config.rank_tolerance) else {
                            continue;
                        };
                        let residual = (x - &b * &c).norm();
                        if residual <= tol && best.as_ref().is_none_or(|cur| residual < cur.residual) {
                            best = Some(Candidate {
                                residual,
                                support: idx.clone(),
                                coefficients: c,
                            });
                        }
                    }
                    best
                })
                .min_by(better)
        };
        if let Some(c) = best {
            return Ok(SparseSolution::from_support(
                dict,
                x,
                &c.support,
                &c.coefficients,
                name,
                size,
            ));
        }
    }
    Err(Error::NoSolutionWithinBudget { max_support })
}

/// A support whose least-squares fit meets the residual tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSupport {
    pub support: Vec<usize>,
    pub coefficients: DVector<f64>,
    pub residual: f64,
}

/// Every support of size at most `max_size` with independent atoms whose
/// least-squares residual is at most `tol`; no early exit.
pub fn supports_within(
    dict: &Dictionary,
    x: &DVector<f64>,
    max_size: usize,
    tol: f64,
    config: &SolverConfig,
) -> Result<Vec<FeasibleSupport>> {
    check_signal(dict, x)?;
    let m = dict.m();
    let top = max_size.min(m).min(dict.n());
    let required = crate::subsets::subset_count(m, 0, top);
    if required > config.budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: config.budget,
        });
    }
    let a = dict.matrix();
    let mut out = Vec::new();
    for size in 0..=top {
        for idx in Subsets::new(m, size) {
            let b = linalg::columns(a, &idx);
            let Some(c) = linalg::lstsq(&b, x, config.rank_tolerance) else {
                continue;
            };
            let residual = (x - &b * &c).norm();
            if residual <= tol {
                out.push(FeasibleSupport {
                    support: idx,
                    coefficients: c,
                    residual,
                });
            }
        }
    }
    Ok(out)
}
