//! Sparse solvers for `x = A s` and its noise-aware relaxation
//! `||x - A s||_2 <= delta`.
//!
//! Exact combinatorial oracles ([`exhaustive_p0`], [`exhaustive_p0_delta`],
//! [`l1_vertex_oracle`]) carry explicit supports and never threshold. The
//! practical solvers ([`omp`], [`sl0`], [`robust_sl0`], [`l1_eq`],
//! [`l1_delta`]) truncate coefficients with magnitude at most
//! `zero_threshold` before returning.

mod exhaustive;
mod l1;
mod lp;
mod omp;
mod sl0;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certificate::{DEFAULT_BUDGET, DEFAULT_RANK_TOLERANCE};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg;
use crate::numfmt::{ser_f64, ser_opt_f64, F17};

pub use exhaustive::{exhaustive_p0, exhaustive_p0_delta, supports_within};
pub use l1::{l1_delta, l1_eq, l1_vertex_oracle};
pub use omp::omp;
pub use sl0::{robust_sl0, sl0};

/// Default magnitude at or below which iterative solver outputs are zeroed.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-6;

/// Relative residual under which an exact solver treats `A s = x` as satisfied.
pub const DEFAULT_ZERO_TOL_REL: f64 = 1e-10;

/// Absolute feasibility tolerance of the iterative solvers.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// Number of entries with `|s_i| > eta`.
pub fn l0_count(s: &DVector<f64>, eta: f64) -> usize {
    s.iter().filter(|v| v.abs() > eta).count()
}

/// A sparse estimate `s_hat` of the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    pub coefficients: DVector<f64>,
    /// Sorted indices of the explicitly nonzero coefficients.
    pub support: Vec<usize>,
    pub residual_norm: f64,
    pub solver_name: String,
    pub iterations: usize,
    pub converged: bool,
}

impl SparseSolution {
    /// Builds a solution whose support is the set of exactly nonzero entries.
    pub fn from_dense(
        dict: &Dictionary,
        x: &DVector<f64>,
        coefficients: DVector<f64>,
        solver_name: impl Into<String>,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let support = coefficients
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        let residual_norm = linalg::residual_norm(dict.matrix(), &coefficients, x);
        SparseSolution {
            coefficients,
            support,
            residual_norm,
            solver_name: solver_name.into(),
            iterations,
            converged,
        }
    }

    /// Places `values` on `support` in a length-`m` vector.
    pub fn from_support(
        dict: &Dictionary,
        x: &DVector<f64>,
        support: &[usize],
        values: &DVector<f64>,
        solver_name: impl Into<String>,
        iterations: usize,
    ) -> Self {
        let mut coefficients = DVector::zeros(dict.m());
        for (&i, &v) in support.iter().zip(values.iter()) {
            coefficients[i] = v;
        }
        Self::from_dense(dict, x, coefficients, solver_name, iterations, true)
    }

    pub fn l0(&self) -> usize {
        self.support.len()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|v| v.abs()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SolutionJson::from(self)).expect("solution serializes")
    }
}

#[derive(Serialize)]
struct SolutionJson<'a> {
    solver_name: &'a str,
    length: usize,
    support: &'a [usize],
    coefficients: Vec<(usize, F17)>,
    #[serde(serialize_with = "ser_f64")]
    residual_norm: f64,
    iterations: usize,
    converged: bool,
}

impl<'a> From<&'a SparseSolution> for SolutionJson<'a> {
    fn from(s: &'a SparseSolution) -> Self {
        SolutionJson {
            solver_name: &s.solver_name,
            length: s.coefficients.len(),
            support: &s.support,
            coefficients: s.support.iter().map(|&i| (i, F17(s.coefficients[i]))).collect(),
            residual_norm: s.residual_norm,
            iterations: s.iterations,
            converged: s.converged,
        }
    }
}

/// Solver identifiers, as used in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    ExhaustiveP0,
    ExhaustiveP0Delta,
    L1Eq,
    L1Delta,
    L1Vertex,
    Omp,
    Sl0,
    RobustSl0,
}

impl SolverKind {
    pub const ALL: [SolverKind; 8] = [
        SolverKind::ExhaustiveP0,
        SolverKind::ExhaustiveP0Delta,
        SolverKind::L1Eq,
        SolverKind::L1Delta,
        SolverKind::L1Vertex,
        SolverKind::Omp,
        SolverKind::Sl0,
        SolverKind::RobustSl0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::ExhaustiveP0 => "exhaustive_p0",
            SolverKind::ExhaustiveP0Delta => "exhaustive_p0_delta",
            SolverKind::L1Eq => "l1_eq",
            SolverKind::L1Delta => "l1_delta",
            SolverKind::L1Vertex => "l1_vertex",
            SolverKind::Omp => "omp",
            SolverKind::Sl0 => "sl0",
            SolverKind::RobustSl0 => "robust_sl0",
        }
    }

    /// Whether the solver aims at the noise-aware constraint `||x - A s|| <= delta`.
    pub fn uses_delta(self) -> bool {
        matches!(
            self,
            SolverKind::ExhaustiveP0Delta | SolverKind::L1Delta | SolverKind::Omp | SolverKind::RobustSl0
        )
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown solver `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OmpParams {
    /// Defaults to `n`.
    pub max_atoms: Option<usize>,
    /// Defaults to `max(delta, zero_tol_rel * ||x||)`.
    #[serde(serialize_with = "ser_opt_f64")]
    pub residual_target: Option<f64>,
}

/// Graduated non-convexity schedule of SL0 and Robust-SL0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sl0Params {
    /// `sigma_0 = sigma0_scale * max |s_init|`.
    #[serde(serialize_with = "ser_f64")]
    pub sigma0_scale: f64,
    #[serde(serialize_with = "ser_f64")]
    pub sigma_decay: f64,
    /// Stop once `sigma < max(sigma_floor, sigma_0 * delta / ||x||)`.
    #[serde(serialize_with = "ser_f64")]
    pub sigma_floor: f64,
    pub inner_steps: usize,
    #[serde(serialize_with = "ser_f64")]
    pub step_scale: f64,
}

impl Default for Sl0Params {
    fn default() -> Self {
        Sl0Params {
            sigma0_scale: 2.0,
            sigma_decay: 0.5,
            sigma_floor: 1e-4,
            inner_steps: 3,
            step_scale: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    #[serde(serialize_with = "ser_f64")]
    pub delta: f64,
    /// Largest support the exhaustive oracles search; defaults to `min(n, m)`.
    pub max_support: Option<usize>,
    #[serde(serialize_with = "ser_f64")]
    pub zero_threshold: f64,
    #[serde(serialize_with = "ser_f64")]
    pub zero_tol_rel: f64,
    pub budget: u128,
    #[serde(serialize_with = "ser_f64")]
    pub rank_tolerance: f64,
    pub max_iterations: usize,
    pub omp: OmpParams,
    pub sl0: Sl0Params,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: 0.0,
            max_support: None,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            zero_tol_rel: DEFAULT_ZERO_TOL_REL,
            budget: DEFAULT_BUDGET,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
            max_iterations: 10_000,
            omp: OmpParams::default(),
            sl0: Sl0Params::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_delta(delta: f64) -> Self {
        SolverConfig {
            delta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return bad(format!("delta must be finite and >= 0, got {}", self.delta));
        }
        if !(self.zero_threshold > 0.0 && self.zero_threshold.is_finite()) {
            return bad(format!("zero_threshold must be > 0, got {}", self.zero_threshold));
        }
        if !(self.zero_tol_rel >= 0.0 && self.zero_tol_rel.is_finite()) {
            return bad(format!("zero_tol_rel must be >= 0, got {}", self.zero_tol_rel));
        }
        if self.max_support == Some(0) {
            return bad("max_support must be >= 1".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1".into());
        }
        if self.omp.max_atoms == Some(0) {
            return bad("max_atoms must be >= 1".into());
        }
        if let Some(t) = self.omp.residual_target {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("residual_target must be >= 0, got {t}"));
            }
        }
        let p = &self.sl0;
        if !(p.sigma_decay > 0.0 && p.sigma_decay < 1.0) {
            return bad(format!("sigma_decay must lie in (0, 1), got {}", p.sigma_decay));
        }
        if !(p.sigma_floor > 0.0 && p.sigma0_scale > 0.0 && p.step_scale > 0.0) || p.inner_steps == 0 {
            return bad("sl0 parameters must be positive".into());
        }
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance <= 1e-3) {
            return bad(format!(
                "rank_tolerance must lie in (0, 1e-3], got {}",
                self.rank_tolerance
            ));
        }
        Ok(())
    }

    /// Residual regarded as exact equality for signal `x`.
    pub fn zero_tol(&self, x: &DVector<f64>) -> f64 {
        self.zero_tol_rel * x.norm()
    }
}

/// Runs the solver named by `kind` with `config` (its `delta` is used by the
/// noise-aware solvers and ignored by the others).
pub fn solve(kind: SolverKind, dict: &Dictionary, x: &DVector<f64>, config: &SolverConfig) -> Result<SparseSolution> {
    match kind {
        SolverKind::ExhaustiveP0 => exhaustive_p0(dict, x, config),
        SolverKind::ExhaustiveP0Delta => exhaustive_p0_delta(dict, x, config.delta, config),
        SolverKind::L1Eq => l1_eq(dict, x, config),
        SolverKind::L1Delta => l1_delta(dict, x, config.delta, config),
        SolverKind::L1Vertex => l1_vertex_oracle(dict, x, config),
        SolverKind::Omp => omp(dict, x, config),
        SolverKind::Sl0 => sl0(dict, x, config),
        SolverKind::RobustSl0 => robust_sl0(dict, x, config.delta, config),
    }
}

/// Least-squares coefficients of `x` on the atoms in `support` (returned in
/// support order), through an orthogonal factorization.
pub fn least_squares_on_support(dict: &Dictionary, support: &[usize], x: &DVector<f64>) -> Result<DVector<f64>> {
    check_signal(dict, x)?;
    if support.len() > dict.n() {
        return Err(Error::SupportTooLarge {
            size: support.len(),
            reason: format!("more atoms than the signal dimension {}", dict.n()),
        });
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= dict.m()) {
        return Err(Error::InvalidParameter(format!("atom index {bad} out of range")));
    }
    linalg::lstsq(&linalg::columns(dict.matrix(), support), x, DEFAULT_RANK_TOLERANCE).ok_or_else(|| {
        Error::SupportTooLarge {
            size: support.len(),
            reason: "selected atoms are linearly dependent".into(),
        }
    })
}

pub(crate) fn check_signal(dict: &Dictionary, x: &DVector<f64>) -> Result<()> {
    if x.len() != dict.n() {
        return Err(Error::DimensionMismatch {
            expected: dict.n(),
            found: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("signal entry {i} is not finite")));
    }
    Ok(())
}

/// Truncation step shared by the iterative solvers.
///
/// Zeroes entries with `|s_i| <= eta`. If that pushes the residual above
/// `allowed + tol`, the surviving support is refit by least squares; if that
/// still fails, the raw vector is kept.
pub(crate) fn finalize(
    dict: &Dictionary,
    x: &DVector<f64>,
    raw: DVector<f64>,
    allowed: f64,
    config: &SolverConfig,
    name: &str,
    iterations: usize,
) -> SparseSolution {
    let a = dict.matrix();
    let eta = config.zero_threshold;
    let slack = allowed + FEASIBILITY_TOL;
    let truncated = raw.map(|v| if v.abs() <= eta { 0.0 } else { v });
    if linalg::residual_norm(a, &truncated, x) <= slack {
        return SparseSolution::from_dense(dict, x, truncated, name, iterations, true);
    }
    let support: Vec<usize> = (0..dict.m()).filter(|&i| truncated[i] != 0.0).collect();
    if support.len() <= dict.n() {
        if let Some(c) = linalg::lstsq(&linalg::columns(a, &support), x, config.rank_tolerance) {
            let refit = SparseSolution::from_support(dict, x, &support, &c, name, iterations);
            if refit.residual_norm <= slack {
                return refit;
            }
        }
    }
    let raw_residual = linalg::residual_norm(a, &raw, x);
    SparseSolution::from_dense(dict, x, raw, name, iterations, raw_residual <= slack)
}

pub(crate) fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    linalg::pseudo_inverse(a, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn l0_examples() {
        assert_eq!(l0_count(&DVector::from_vec(vec![0.0, 0.0, 3.1]), 1e-6), 1);
        assert_eq!(l0_count(&DVector::zeros(4), 1e-6), 0);
        assert_eq!(l0_count(&DVector::from_vec(vec![1e-9, 0.5]), 1e-6), 1);
    }

    #[test]
    fn least_squares_examples() {
        let h = FRAC_1_SQRT_2;
        let d = Dictionary::from_entries(&[vec![1.0, 0.0, h], vec![0.0, 1.0, h]]).unwrap();
        let u = d.atom(2);
        let c = least_squares_on_support(&d, &[2], &u).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15);
        let c = least_squares_on_support(&d, &[0, 1], &u).unwrap();
        assert!((c[0] - h).abs() < 1e-15 && (c[1] - h).abs() < 1e-15);
        let x = DVector::from_vec(vec![0.3, -0.7]);
        let c = least_squares_on_support(&d, &[0, 1], &x).unwrap();
        assert!((c[0] - 0.3).abs() < 1e-15 && (c[1] + 0.7).abs() < 1e-15);
        assert!(matches!(
            least_squares_on_support(&d, &[0, 1, 2], &x),
            Err(Error::SupportTooLarge { size: 3, .. })
        ));
        assert!(matches!(
            least_squares_on_support(&d, &[0], &DVector::zeros(3)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
            assert_eq!(k.name().replace('_', "-").parse::<SolverKind>().unwrap(), k);
        }
        assert!("magic".parse::<SolverKind>().is_err());
    }

    #[test]
    fn solution_json_is_sparse() {
        let d = Dictionary::dirac_hadamard(4).unwrap();
        let x = d.atom(1);
        let s = SparseSolution::from_support(&d, &x, &[1], &DVector::from_vec(vec![1.0]), "t", 1);
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["support"], serde_json::json!([1]));
        assert_eq!(v["coefficients"][0][0], 1);
        assert_eq!(v["coefficients"][0][1].as_f64(), Some(1.0));
        assert_eq!(v["residual_norm"].as_f64(), Some(0.0));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let mut c = SolverConfig::default();
        c.omp.max_atoms = Some(0);
        assert!(c.validate().is_err());
        assert!(SolverConfig::with_delta(-1.0).validate().is_err());
    }
}
