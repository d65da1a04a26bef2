use std::io::Write;

use serde::Serialize;

use super::trial::{SolverRecord, TrialResult};
use super::verify::{BoundCheck, ChainCheck, CheckStatus, CHECK_TOLERANCE};
use crate::error::{Error, Result};
use crate::numfmt::{fmt17, ser_f64};
use crate::solvers::SolverKind;

/// Min, median and max of `error / bound` over applicable checks with a
/// positive bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioStats {
    pub count: usize,
    #[serde(serialize_with = "ser_f64")]
    pub min: f64,
    #[serde(serialize_with = "ser_f64")]
    pub median: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max: f64,
}

impl RatioStats {
    pub fn from_values(mut values: Vec<f64>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let median = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        Some(RatioStats {
            count: n,
            min: values[0],
            median,
            max: values[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckTally {
    pub applicable: usize,
    pub satisfied: usize,
    pub violations: usize,
    pub not_applicable: usize,
    pub ratio: Option<RatioStats>,
}

impl CheckTally {
    fn from_checks<'a>(checks: impl Iterator<Item = &'a BoundCheck>) -> Self {
        let mut t = CheckTally {
            applicable: 0,
            satisfied: 0,
            violations: 0,
            not_applicable: 0,
            ratio: None,
        };
        let mut ratios = Vec::new();
        for c in checks {
            match c.status {
                CheckStatus::NotApplicable => t.not_applicable += 1,
                CheckStatus::Satisfied => t.satisfied += 1,
                CheckStatus::Violated => t.violations += 1,
            }
            if c.applicable() {
                t.applicable += 1;
                ratios.extend(c.ratio);
            }
        }
        t.ratio = RatioStats::from_values(ratios);
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainTally {
    pub applicable: usize,
    pub passed: usize,
    pub failed: usize,
    pub not_applicable: usize,
}

impl ChainTally {
    fn from_checks<'a>(checks: impl Iterator<Item = Option<&'a ChainCheck>>) -> Self {
        let mut t = ChainTally {
            applicable: 0,
            passed: 0,
            failed: 0,
            not_applicable: 0,
        };
        for c in checks {
            match c.map(|c| c.status) {
                None | Some(CheckStatus::NotApplicable) => t.not_applicable += 1,
                Some(CheckStatus::Satisfied) => t.passed += 1,
                Some(CheckStatus::Violated) => t.failed += 1,
            }
        }
        t.applicable = t.passed + t.failed;
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub solver: SolverKind,
    pub trials: usize,
    pub failures: usize,
    pub coherence_bound: CheckTally,
    pub main_bound: CheckTally,
    pub looser_bound: CheckTally,
    pub general_bound: CheckTally,
    pub proof_chain: ChainTally,
}

impl SolverSummary {
    pub fn violations(&self) -> usize {
        self.coherence_bound.violations
            + self.main_bound.violations
            + self.looser_bound.violations
            + self.general_bound.violations
            + self.proof_chain.failed
    }
}

/// Outcomes of the main-vs-coherence comparison at `ell = 2k` over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessSummary {
    /// Trials where `sigma_min(2k)^2 + M (2k - 1) >= 1` was checked.
    pub margin_checked: usize,
    pub margin_failures: usize,
    /// Checked trials where the margin is zero (within the equality tolerance).
    pub equality_cases: usize,
    /// Trials where both bounds apply.
    pub ordering_checked: usize,
    pub ordering_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub trials: usize,
    #[serde(serialize_with = "ser_f64")]
    pub check_tolerance: f64,
    pub solvers: Vec<SolverSummary>,
    pub tightness: TightnessSummary,
    pub total_violations: usize,
}

/// Per-solver tallies in order of first appearance, plus the tightness tally.
pub fn aggregate_report(results: &[TrialResult]) -> Result<ExperimentReport> {
    if results.is_empty() {
        return Err(Error::EmptyInput("no trial results to aggregate".into()));
    }
    let mut order: Vec<SolverKind> = Vec::new();
    for r in results {
        for rec in &r.records {
            if !order.contains(&rec.solver) {
                order.push(rec.solver);
            }
        }
    }
    let solvers: Vec<SolverSummary> = order
        .into_iter()
        .map(|kind| {
            let recs: Vec<&SolverRecord> = results
                .iter()
                .flat_map(|r| r.records.iter())
                .filter(|rec| rec.solver == kind)
                .collect();
            SolverSummary {
                solver: kind,
                trials: recs.len(),
                failures: recs.iter().filter(|r| r.failed()).count(),
                coherence_bound: CheckTally::from_checks(recs.iter().map(|r| &r.coherence_bound)),
                main_bound: CheckTally::from_checks(recs.iter().map(|r| &r.main_bound)),
                looser_bound: CheckTally::from_checks(recs.iter().map(|r| &r.looser_bound)),
                general_bound: CheckTally::from_checks(recs.iter().map(|r| &r.general_bound)),
                proof_chain: ChainTally::from_checks(recs.iter().map(|r| r.proof_chain.as_ref())),
            }
        })
        .collect();

    let cmp = results.iter().map(|r| &r.bound_comparison);
    let tightness = TightnessSummary {
        margin_checked: cmp.clone().filter(|c| c.tightness_ok.is_some()).count(),
        margin_failures: cmp.clone().filter(|c| c.tightness_ok == Some(false)).count(),
        equality_cases: cmp.clone().filter(|c| c.equality).count(),
        ordering_checked: cmp.clone().filter(|c| c.ordering_ok.is_some()).count(),
        ordering_failures: cmp.filter(|c| c.ordering_ok == Some(false)).count(),
    };
    let total_violations = solvers.iter().map(SolverSummary::violations).sum::<usize>()
        + tightness.margin_failures
        + tightness.ordering_failures;
    Ok(ExperimentReport {
        trials: results.len(),
        check_tolerance: CHECK_TOLERANCE,
        solvers,
        tightness,
        total_violations,
    })
}

pub const CSV_HEADER: [&str; 24] = [
    "trial_id",
    "solver",
    "n",
    "m",
    "k",
    "epsilon",
    "delta",
    "error",
    "residual",
    "l0",
    "bound_eq5",
    "bound_eq8",
    "bound_eq13",
    "bound_eq14",
    "applicable_eq5",
    "applicable_eq8",
    "applicable_eq13",
    "applicable_eq14",
    "satisfied_eq5",
    "satisfied_eq8",
    "satisfied_eq13",
    "satisfied_eq14",
    "proof_chain",
    "status",
];

fn opt_real(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

fn status_word(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::NotApplicable => "not_applicable",
        CheckStatus::Satisfied => "satisfied",
        CheckStatus::Violated => "violated",
    }
}

/// One row per trial and solver. Bounds that do not apply and the
/// satisfaction flag of such checks are left empty.
pub fn write_csv<W: Write>(results: &[TrialResult], out: W) -> Result<()> {
    let to_err = |e: csv::Error| Error::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(to_err)?;
    for r in results {
        for rec in &r.records {
            let checks = [
                &rec.coherence_bound,
                &rec.main_bound,
                &rec.looser_bound,
                &rec.general_bound,
            ];
            let mut row: Vec<String> = vec![
                r.trial_id.to_string(),
                rec.solver.name().to_string(),
                r.n.to_string(),
                r.m.to_string(),
                r.k.to_string(),
                fmt17(r.epsilon),
                fmt17(r.delta),
                opt_real(rec.error),
                opt_real(rec.residual),
                rec.l0.to_string(),
            ];
            row.extend(checks.iter().map(|c| opt_real(c.bound)));
            row.extend(checks.iter().map(|c| c.applicable().to_string()));
            row.extend(checks.iter().map(|c| {
                if c.applicable() {
                    c.satisfied().to_string()
                } else {
                    String::new()
                }
            }));
            row.push(
                rec.proof_chain
                    .as_ref()
                    .map_or("not_applicable", |c| status_word(c.status))
                    .to_string(),
            );
            row.push(rec.failure.clone().unwrap_or_else(|| "ok".into()));
            w.write_record(&row).map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        message: e.to_string(),
    })?;
    Ok(())
}

pub fn csv_string(results: &[TrialResult]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(results, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
