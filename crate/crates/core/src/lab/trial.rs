use std::path::PathBuf;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::instance::{CoefficientDist, NoisyInstance};
use super::verify::{
    verify_coherence_bound, verify_general_bound, verify_looser_bound, verify_main_bound, verify_proof_chain,
    BoundCheck, ChainCheck,
};
use crate::certificate::{compare_bounds, BoundComparison, BoundInputs, CertificateOptions, DictionaryCertificate};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::numfmt::{ser_f64, ser_opt_f64, F17};
use crate::solvers::{solve, SolverConfig, SolverKind, SparseSolution};

/// Where a dictionary comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DictionarySource {
    Gaussian { n: usize, m: usize, seed: u64 },
    DiracHadamard { n: usize },
    File { path: PathBuf },
}

impl DictionarySource {
    pub fn build(&self) -> Result<Dictionary> {
        match self {
            DictionarySource::Gaussian { n, m, seed } => Dictionary::random_gaussian(*n, *m, *seed),
            DictionarySource::DiracHadamard { n } => Dictionary::dirac_hadamard(*n),
            DictionarySource::File { path } => Dictionary::load(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub dictionary: DictionarySource,
    pub k: usize,
    pub coefficients: CoefficientDist,
    pub epsilon: f64,
    pub delta: f64,
    pub solvers: Vec<SolverKind>,
    /// Shared by all solvers; its `delta` is replaced by the trial's.
    pub solver_config: SolverConfig,
    pub seed: u64,
    /// Random stream within `seed`; experiments use the trial index.
    pub stream: u64,
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        self.coefficients.validate()?;
        self.solver_config.validate()
    }
}

/// Dictionary and certificate shared by many trials.
#[derive(Debug, Clone)]
pub struct TrialContext {
    pub dictionary: Dictionary,
    pub certificate: DictionaryCertificate,
}

impl TrialContext {
    pub fn new(dictionary: Dictionary, opts: CertificateOptions) -> Result<Self> {
        let certificate = DictionaryCertificate::compute(&dictionary, opts)?;
        Ok(TrialContext {
            dictionary,
            certificate,
        })
    }
}

/// What one solver produced on one trial, and how it fared against each bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverRecord {
    pub solver: SolverKind,
    /// Error code when the solver failed; all checks are then not applicable.
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_message: Option<String>,
    pub support: Vec<usize>,
    pub coefficients: Vec<(usize, F17)>,
    pub l0: usize,
    /// `||s_hat - s0||_2`; `None` when the solver failed.
    #[serde(serialize_with = "ser_opt_f64")]
    pub error: Option<f64>,
    /// `||x - A s_hat||_2`; `None` when the solver failed.
    #[serde(serialize_with = "ser_opt_f64")]
    pub residual: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub coherence_bound: BoundCheck,
    pub main_bound: BoundCheck,
    pub looser_bound: BoundCheck,
    pub general_bound: BoundCheck,
    pub proof_chain: Option<ChainCheck>,
}

impl SolverRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial_id: usize,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    #[serde(serialize_with = "ser_f64")]
    pub epsilon: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta: f64,
    pub instance: NoisyInstance,
    /// Main bound against the coherence bound at `ell = 2k`.
    pub bound_comparison: BoundComparison,
    pub records: Vec<SolverRecord>,
}

impl TrialResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trial result serializes")
    }
}

/// Builds the dictionary and certificate from `spec` and runs one trial.
pub fn run_trial(spec: &TrialSpec) -> Result<TrialResult> {
    let dict = spec.dictionary.build()?;
    let ctx = TrialContext::new(
        dict,
        CertificateOptions {
            rank_tolerance: spec.solver_config.rank_tolerance,
            budget: spec.solver_config.budget,
        },
    )?;
    run_trial_in(&ctx, spec, 0)
}

/// Runs one trial against a precomputed dictionary certificate. Solver
/// failures are recorded per solver and do not abort the trial.
pub fn run_trial_in(ctx: &TrialContext, spec: &TrialSpec, trial_id: usize) -> Result<TrialResult> {
    spec.validate()?;
    let dict = &ctx.dictionary;
    let cert = &ctx.certificate;
    let inst = NoisyInstance::generate(dict, spec.k, &spec.coefficients, spec.epsilon, spec.seed, spec.stream)?;
    let inputs = BoundInputs::new(spec.k, spec.epsilon, spec.delta)?;
    let config = SolverConfig {
        delta: spec.delta,
        ..spec.solver_config
    };
    let records = spec
        .solvers
        .iter()
        .map(|&kind| {
            let outcome = solve(kind, dict, &inst.noisy_signal, &config);
            record(ctx, &inst, inputs, kind, &config, outcome)
        })
        .collect();
    Ok(TrialResult {
        trial_id,
        n: dict.n(),
        m: dict.m(),
        k: spec.k,
        epsilon: spec.epsilon,
        delta: spec.delta,
        bound_comparison: compare_bounds(inputs, cert, cert.coherence),
        instance: inst,
        records,
    })
}

fn is_exact(kind: SolverKind) -> bool {
    matches!(
        kind,
        SolverKind::ExhaustiveP0 | SolverKind::ExhaustiveP0Delta | SolverKind::L1Vertex
    )
}

fn record(
    ctx: &TrialContext,
    inst: &NoisyInstance,
    inputs: BoundInputs,
    kind: SolverKind,
    config: &SolverConfig,
    outcome: Result<SparseSolution>,
) -> SolverRecord {
    let dict = &ctx.dictionary;
    let cert = &ctx.certificate;
    let sol = match outcome {
        Ok(sol) => sol,
        Err(e) => {
            let na = BoundCheck::not_applicable("solver failed");
            return SolverRecord {
                solver: kind,
                failure: Some(e.code().to_string()),
                failure_message: Some(e.to_string()),
                support: Vec::new(),
                coefficients: Vec::new(),
                l0: 0,
                error: None,
                residual: None,
                iterations: 0,
                converged: false,
                coherence_bound: na.clone(),
                main_bound: na.clone(),
                looser_bound: na.clone(),
                general_bound: na,
                proof_chain: None,
            };
        }
    };
    // the checks judge the eta-truncated estimate of the practical solvers
    let estimate: DVector<f64> = if is_exact(kind) {
        sol.coefficients.clone()
    } else {
        sol.coefficients
            .map(|v| if v.abs() <= config.zero_threshold { 0.0 } else { v })
    };
    let support: Vec<usize> = (0..estimate.len()).filter(|&i| estimate[i] != 0.0).collect();
    let residual = (&inst.noisy_signal - dict.apply(&estimate)).norm();
    let error = (&estimate - &inst.ground_truth).norm();
    let general_bound = verify_general_bound(cert, inputs, support.len(), residual, error);
    let proof_chain = verify_proof_chain(
        dict,
        cert,
        &inst.clean_signal,
        &inst.ground_truth,
        &estimate,
        residual,
        inputs,
    );
    SolverRecord {
        solver: kind,
        failure: None,
        failure_message: None,
        coefficients: support.iter().map(|&i| (i, F17(estimate[i]))).collect(),
        l0: support.len(),
        support,
        error: Some(error),
        residual: Some(residual),
        iterations: sol.iterations,
        converged: sol.converged,
        coherence_bound: verify_coherence_bound(cert, inputs, kind, error),
        main_bound: verify_main_bound(cert, inputs, kind, error),
        looser_bound: verify_looser_bound(cert, inputs, kind, error),
        general_bound,
        proof_chain: Some(proof_chain),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(k: usize, eps: f64, delta: f64, solvers: Vec<SolverKind>) -> TrialSpec {
        TrialSpec {
            dictionary: DictionarySource::Gaussian { n: 8, m: 12, seed: 3 },
            k,
            coefficients: CoefficientDist::default(),
            epsilon: eps,
            delta,
            solvers,
            solver_config: SolverConfig::default(),
            seed: 17,
            stream: 0,
        }
    }

    #[test]
    fn noiseless_exhaustive_is_exact() {
        let r = run_trial(&spec(3, 0.0, 0.0, vec![SolverKind::ExhaustiveP0])).unwrap();
        assert!(r.records[0].error.unwrap() <= 1e-9);
        assert_eq!(r.records[0].support, r.instance.support);
    }

    #[test]
    fn noisy_oracle_meets_main_bound() {
        let r = run_trial(&spec(
            2,
            1e-2,
            2e-2,
            vec![SolverKind::ExhaustiveP0Delta, SolverKind::Omp],
        ))
        .unwrap();
        let p0d = &r.records[0];
        assert!(p0d.main_bound.satisfied());
        assert!(p0d.looser_bound.satisfied());
        assert!(p0d.proof_chain.as_ref().unwrap().applicable());
        assert!(!r.records[1].main_bound.applicable());
    }

    #[test]
    fn solver_failure_is_recorded() {
        let mut s = spec(2, 0.0, 0.0, vec![SolverKind::ExhaustiveP0, SolverKind::Omp]);
        s.solver_config.budget = 10;
        let dict = s.dictionary.build().unwrap();
        let ctx = TrialContext::new(dict, CertificateOptions::default()).unwrap();
        let r = run_trial_in(&ctx, &s, 4).unwrap();
        assert_eq!(r.trial_id, 4);
        assert_eq!(r.records[0].failure.as_deref(), Some("BUDGET_EXCEEDED"));
        assert!(!r.records[1].failed());
    }

    #[test]
    fn serialization_is_deterministic() {
        let s = spec(
            2,
            1e-3,
            1e-3,
            vec![SolverKind::ExhaustiveP0Delta, SolverKind::Sl0, SolverKind::L1Delta],
        );
        assert_eq!(run_trial(&s).unwrap().to_json(), run_trial(&s).unwrap().to_json());
    }
}
