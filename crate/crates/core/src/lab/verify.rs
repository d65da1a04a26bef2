//! Trial-level checks of the stability statements. A check whose hypotheses
//! fail is reported as not applicable, never as violated.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::certificate::{
    donoho_stability_bound, looser_bound, main_stability_bound, BoundInputs, DictionaryCertificate,
};
use crate::dictionary::Dictionary;
use crate::error::Result;
use crate::linalg;
use crate::numfmt::{ser_f64, ser_opt_f64};
use crate::solvers::{supports_within, SolverConfig, SolverKind, FEASIBILITY_TOL};

/// Additive slack on every bound comparison.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    NotApplicable,
    Satisfied,
    Violated,
}

/// Outcome of comparing an observed error with a bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub status: CheckStatus,
    #[serde(serialize_with = "ser_opt_f64")]
    pub bound: Option<f64>,
    /// `error / bound`, when applicable and the bound is positive.
    #[serde(serialize_with = "ser_opt_f64")]
    pub ratio: Option<f64>,
    /// Why the check does not apply.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl BoundCheck {
    pub fn not_applicable(reason: impl Into<String>) -> Self {
        BoundCheck {
            status: CheckStatus::NotApplicable,
            bound: None,
            ratio: None,
            reason: Some(reason.into()),
        }
    }

    fn compare(error: f64, bound: f64) -> Self {
        let status = if error <= bound + CHECK_TOLERANCE {
            CheckStatus::Satisfied
        } else {
            CheckStatus::Violated
        };
        BoundCheck {
            status,
            bound: Some(bound),
            ratio: (bound > 0.0).then(|| error / bound),
            reason: None,
        }
    }

    pub fn applicable(&self) -> bool {
        self.status != CheckStatus::NotApplicable
    }

    pub fn satisfied(&self) -> bool {
        self.status == CheckStatus::Satisfied
    }

    pub fn violated(&self) -> bool {
        self.status == CheckStatus::Violated
    }
}

fn p0_delta_gate(inputs: BoundInputs, kind: SolverKind) -> Option<BoundCheck> {
    if kind != SolverKind::ExhaustiveP0Delta {
        return Some(BoundCheck::not_applicable("solver is not the P0,delta oracle"));
    }
    if inputs.delta < inputs.epsilon {
        return Some(BoundCheck::not_applicable("delta < epsilon"));
    }
    None
}

/// Coherence-based bound `(eps + delta) / sqrt(1 - M (2k - 1))` for the
/// P0,delta oracle, under `k < (1 + 1/M) / 2` and `delta >= eps`.
pub fn verify_coherence_bound(
    cert: &DictionaryCertificate,
    inputs: BoundInputs,
    kind: SolverKind,
    error: f64,
) -> BoundCheck {
    if let Some(na) = p0_delta_gate(inputs, kind) {
        return na;
    }
    match donoho_stability_bound(inputs, cert.coherence) {
        Ok(b) => BoundCheck::compare(error, b),
        Err(_) => BoundCheck::not_applicable("k >= (1 + 1/M) / 2"),
    }
}

/// `(delta + eps) / sigma_min(2k)` for the P0,delta oracle, under
/// `2k < spark` and `delta >= eps`.
pub fn verify_main_bound(
    cert: &DictionaryCertificate,
    inputs: BoundInputs,
    kind: SolverKind,
    error: f64,
) -> BoundCheck {
    if let Some(na) = p0_delta_gate(inputs, kind) {
        return na;
    }
    if !cert.spark.admits_unique(inputs.k) {
        return BoundCheck::not_applicable("2k >= spark");
    }
    match main_stability_bound(inputs, cert) {
        Ok(b) => BoundCheck::compare(error, b),
        Err(_) => BoundCheck::not_applicable("2k > q"),
    }
}

/// `(delta + eps) / sigma_min(q)` for the P0,delta oracle, same hypotheses as
/// [`verify_main_bound`].
pub fn verify_looser_bound(
    cert: &DictionaryCertificate,
    inputs: BoundInputs,
    kind: SolverKind,
    error: f64,
) -> BoundCheck {
    if let Some(na) = p0_delta_gate(inputs, kind) {
        return na;
    }
    if !cert.spark.admits_unique(inputs.k) {
        return BoundCheck::not_applicable("2k >= spark");
    }
    BoundCheck::compare(error, looser_bound(inputs, cert))
}

/// `(delta + eps) / sigma_min(q)` for an arbitrary estimate with `l0`
/// nonzeros and residual `||x - A s_hat||_2 = residual`. Applies when
/// `k < spark/2`, `l0 < spark/2` and `residual <= delta` (up to the solvers'
/// feasibility slack); `delta >= eps` is not needed.
pub fn verify_general_bound(
    cert: &DictionaryCertificate,
    inputs: BoundInputs,
    l0: usize,
    residual: f64,
    error: f64,
) -> BoundCheck {
    if !cert.spark.admits_unique(inputs.k) {
        return BoundCheck::not_applicable("ground truth has 2k >= spark");
    }
    if !cert.spark.admits_unique(l0) {
        return BoundCheck::not_applicable("estimate has 2 l0 >= spark");
    }
    if residual > inputs.delta + FEASIBILITY_TOL {
        return BoundCheck::not_applicable("residual exceeds delta");
    }
    BoundCheck::compare(error, looser_bound(inputs, cert))
}

/// The nonzero entries `v` of `s0 - s_hat` and the matching columns `B`, so
/// that `B v = A (s0 - s_hat)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceWitness {
    pub diff_support: Vec<usize>,
    pub v: DVector<f64>,
    pub b: DMatrix<f64>,
    pub ell_actual: usize,
}

impl DifferenceWitness {
    pub fn new(dict: &Dictionary, s0: &DVector<f64>, s_hat: &DVector<f64>) -> Self {
        let diff = s0 - s_hat;
        let diff_support: Vec<usize> = (0..diff.len()).filter(|&i| diff[i] != 0.0).collect();
        let v = DVector::from_iterator(diff_support.len(), diff_support.iter().map(|&i| diff[i]));
        let b = linalg::columns(dict.matrix(), &diff_support);
        DifferenceWitness {
            ell_actual: diff_support.len(),
            diff_support,
            v,
            b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub status: CheckStatus,
    pub ell_actual: usize,
    /// `||x0 - A s_hat|| <= delta + eps`; `None` when the residual exceeds delta.
    pub clean_residual_ok: Option<bool>,
    /// `B v = A (s0 - s_hat)`.
    pub factorization_ok: bool,
    /// `||B v|| >= sigma_min(ell_actual) ||v||`; `None` when `ell_actual > q`.
    pub lower_bound_ok: Option<bool>,
    #[serde(serialize_with = "ser_f64")]
    pub clean_residual: f64,
    #[serde(serialize_with = "ser_f64")]
    pub bv_norm: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub sigma_v_norm: Option<f64>,
}

impl ChainCheck {
    pub fn applicable(&self) -> bool {
        self.status != CheckStatus::NotApplicable
    }
}

/// Recomputes the steps of the stability argument for one estimate: the
/// clean-signal residual, the difference factorization, and the singular
/// value lower bound on the difference.
pub fn verify_proof_chain(
    dict: &Dictionary,
    cert: &DictionaryCertificate,
    clean_signal: &DVector<f64>,
    s0: &DVector<f64>,
    s_hat: &DVector<f64>,
    residual: f64,
    inputs: BoundInputs,
) -> ChainCheck {
    let a = dict.matrix();
    let w = DifferenceWitness::new(dict, s0, s_hat);
    let clean_residual = (clean_signal - a * s_hat).norm();
    let clean_residual_ok = (residual <= inputs.delta + FEASIBILITY_TOL)
        .then_some(clean_residual <= inputs.delta + inputs.epsilon + CHECK_TOLERANCE);
    let bv = &w.b * &w.v;
    let direct = a * (s0 - s_hat);
    let factorization_ok = (&bv - &direct).norm() <= CHECK_TOLERANCE;
    let bv_norm = bv.norm();
    let sigma_v_norm = cert.sigma_min(w.ell_actual).map(|s| s * w.v.norm());
    let lower_bound_ok = sigma_v_norm.map(|sv| bv_norm >= sv - CHECK_TOLERANCE);
    let status = if sigma_v_norm.is_none() {
        CheckStatus::NotApplicable
    } else if clean_residual_ok != Some(false) && factorization_ok && lower_bound_ok == Some(true) {
        CheckStatus::Satisfied
    } else {
        CheckStatus::Violated
    };
    ChainCheck {
        status,
        ell_actual: w.ell_actual,
        clean_residual_ok,
        factorization_ok,
        lower_bound_ok,
        clean_residual,
        bv_norm,
        sigma_v_norm,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCheck {
    pub k: usize,
    /// Whether `2k < spark`, under which uniqueness is guaranteed.
    pub guaranteed: bool,
    pub unique: bool,
    /// Every support of size at most `k` that represents `x0 = A s0` exactly
    /// with all coefficients nonzero, in enumeration order.
    pub representations: Vec<Vec<usize>>,
}

/// Brute-force search for representations of `A s0` using at most
/// `||s0||_0` atoms.
pub fn verify_uniqueness(
    dict: &Dictionary,
    cert: &DictionaryCertificate,
    s0: &DVector<f64>,
    config: &SolverConfig,
) -> Result<UniquenessCheck> {
    let support: Vec<usize> = (0..s0.len()).filter(|&i| s0[i] != 0.0).collect();
    let k = support.len();
    let x0 = dict.apply(s0);
    let tol = config.zero_tol(&x0);
    let representations: Vec<Vec<usize>> = supports_within(dict, &x0, k, tol, config)?
        .into_iter()
        .filter(|f| f.coefficients.iter().all(|c| c.abs() > tol))
        .map(|f| f.support)
        .collect();
    let unique = representations.len() == 1 && representations[0] == support;
    Ok(UniquenessCheck {
        k,
        guaranteed: cert.spark.admits_unique(k),
        unique,
        representations,
    })
}
