use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::instance::CoefficientDist;
use super::report::{aggregate_report, write_csv, ExperimentReport};
use super::trial::{run_trial_in, DictionarySource, TrialContext, TrialResult, TrialSpec};
use crate::certificate::{tightness_scan, CertificateOptions, DictionaryCertificate, TightnessRow};
use crate::error::{Error, Result};
use crate::numfmt::ser_vec_f64;
use crate::solvers::{SolverConfig, SolverKind};

/// A seeded grid experiment. Trial `t` runs grid cell `t mod cells` (cells
/// ordered by k, then epsilon, then delta factor) with random stream `t` of
/// `master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dictionary: DictionarySource,
    pub k_values: Vec<usize>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub epsilon_values: Vec<f64>,
    /// `delta = factor * epsilon`.
    #[serde(serialize_with = "ser_vec_f64")]
    pub delta_factors: Vec<f64>,
    pub solvers: Vec<SolverKind>,
    pub master_seed: u64,
    pub trials: usize,
    #[serde(default)]
    pub coefficients: CoefficientDist,
    /// Also supplies the rank tolerance and enumeration budget of the
    /// dictionary certificate.
    #[serde(default)]
    pub solver: SolverConfig,
}

/// The bundled default configuration.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../../configs/default_experiment.json");

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative dictionary file path is resolved
    /// against the config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let DictionarySource::File { path: p } = &mut cfg.dictionary {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn bundled_default() -> Self {
        Self::from_json(DEFAULT_CONFIG_JSON).expect("bundled config is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.k_values.is_empty() || self.epsilon_values.is_empty() || self.delta_factors.is_empty() {
            return bad("k_values, epsilon_values and delta_factors must be non-empty".into());
        }
        if self.solvers.is_empty() {
            return bad("solvers must be non-empty".into());
        }
        if let Some(e) = self.epsilon_values.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return bad(format!("epsilon values must be finite and >= 0, got {e}"));
        }
        if let Some(f) = self.delta_factors.iter().find(|f| !(f.is_finite() && **f >= 0.0)) {
            return bad(format!("delta factors must be finite and >= 0, got {f}"));
        }
        self.coefficients.validate()?;
        self.solver.validate()
    }

    /// `(k, epsilon, delta)` for every grid cell.
    pub fn cells(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for &k in &self.k_values {
            for &eps in &self.epsilon_values {
                for &f in &self.delta_factors {
                    out.push((k, eps, f * eps));
                }
            }
        }
        out
    }

    pub fn trial_spec(&self, trial: usize) -> TrialSpec {
        let cells = self.cells();
        let (k, epsilon, delta) = cells[trial % cells.len()];
        TrialSpec {
            dictionary: self.dictionary.clone(),
            k,
            coefficients: self.coefficients,
            epsilon,
            delta,
            solvers: self.solvers.clone(),
            solver_config: self.solver,
            seed: self.master_seed,
            stream: trial as u64,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub certificate: DictionaryCertificate,
    pub results: Vec<TrialResult>,
    pub report: ExperimentReport,
}

#[derive(Serialize)]
struct OutcomeJson<'a> {
    config: &'a ExperimentConfig,
    certificate: &'a DictionaryCertificate,
    tightness_scan: Vec<TightnessRow>,
    summary: &'a ExperimentReport,
    trials: &'a [TrialResult],
}

impl ExperimentOutcome {
    /// Full nested report: config, certificate, summary and every trial.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&OutcomeJson {
            config: &self.config,
            certificate: &self.certificate,
            tightness_scan: tightness_scan(&self.certificate),
            summary: &self.report,
            trials: &self.results,
        })
        .expect("report serializes")
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_csv(&self.results, &mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Runs every trial on a pool of `workers` threads. Results do not depend
/// on `workers`.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ExperimentOutcome> {
    config.validate()?;
    if workers == 0 {
        return Err(Error::InvalidParameter("workers must be >= 1".into()));
    }
    let dict = config.dictionary.build()?;
    if let Some(k) = config.k_values.iter().find(|&&k| k > dict.m()) {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds m = {}", dict.m())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))?;
    let opts = CertificateOptions {
        rank_tolerance: config.solver.rank_tolerance,
        budget: config.solver.budget,
    };
    let (ctx, results) = pool.install(|| -> Result<_> {
        let ctx = TrialContext::new(dict, opts)?;
        let results = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial_in(&ctx, &config.trial_spec(t), t))
            .collect::<Result<Vec<_>>>()?;
        Ok((ctx, results))
    })?;
    let report = aggregate_report(&results)?;
    Ok(ExperimentOutcome {
        config: config.clone(),
        certificate: ctx.certificate,
        results,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_default_parses() {
        let c = ExperimentConfig::bundled_default();
        assert_eq!(c.trials, 500);
        assert_eq!(c.k_values, vec![1, 2, 3, 4]);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        v["surprise"] = serde_json::json!(1);
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert_eq!(err.code(), "PARSE_FAILURE");
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        v["epsilon_values"] = serde_json::json!([0.1, -0.01]);
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert_eq!(err.code(), "INVALID_PARAMETER");
    }

    #[test]
    fn cells_cycle_over_trials() {
        let c = ExperimentConfig::bundled_default();
        let n = c.cells().len();
        assert_eq!(c.trial_spec(0).k, c.trial_spec(n).k);
        assert_eq!(c.trial_spec(3).stream, 3);
    }

    #[test]
    fn small_run_is_worker_independent() {
        let mut c = ExperimentConfig::bundled_default();
        c.trials = 12;
        let a = run_experiment(&c, 1).unwrap();
        let b = run_experiment(&c, 3).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.report.total_violations, 0);
    }
}
