//! Dictionary-level quantities (coherence, spark, Kruskal rank, the
//! per-cardinality minimum singular value profile) and the closed-form
//! sparsity thresholds and stability bounds built from them.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::linalg;
use crate::numfmt::{ser_f64, ser_vec_f64};
use crate::subsets::{binomial, subset_count, Subsets};

/// Default relative singularity tolerance: a subset is dependent iff
/// `sigma_min <= tol * sigma_max`.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

/// Default cap on the number of column subsets any enumeration may visit.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Additive slack for the coherence-side tightness check.
pub const TIGHTNESS_TOLERANCE: f64 = 1e-9;

/// Margin under which a tightness check is logged as an equality case.
pub const EQUALITY_TOLERANCE: f64 = 1e-12;

/// Slack for the bound-ordering check (main bound vs coherence bound).
pub const ORDERING_TOLERANCE: f64 = 1e-12;

/// Largest atom correlation, together with an attaining pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    pub value: f64,
    /// `None` when the dictionary has a single atom and coherence is undefined
    /// (reported as 0).
    pub pair: Option<(usize, usize)>,
}

pub fn coherence(dict: &Dictionary) -> Coherence {
    let a = dict.matrix();
    let m = dict.m();
    if m < 2 {
        return Coherence { value: 0.0, pair: None };
    }
    let gram = a.tr_mul(a);
    let mut best = (0.0, (0, 1));
    for j in 1..m {
        for i in 0..j {
            let v = gram[(i, j)].abs();
            if v > best.0 {
                best = (v, (i, j));
            }
        }
    }
    Coherence {
        value: best.0,
        pair: Some(best.1),
    }
}

/// Spark of a dictionary, or the sentinel for matrices whose columns are all
/// linearly independent (possible only when `m <= n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spark {
    Finite(usize),
    NoDependentSubset,
}

impl Spark {
    pub fn value(self) -> Option<usize> {
        match self {
            Spark::Finite(s) => Some(s),
            Spark::NoDependentSubset => None,
        }
    }

    /// Kruskal rank `q`: `spark - 1`, or `m` for the sentinel.
    pub fn kruskal_rank(self, m: usize) -> usize {
        match self {
            Spark::Finite(s) => s - 1,
            Spark::NoDependentSubset => m,
        }
    }

    /// Whether `2k < spark` (the uniqueness hypothesis) holds.
    pub fn admits_unique(self, k: usize) -> bool {
        match self {
            Spark::Finite(s) => 2 * k < s,
            Spark::NoDependentSubset => true,
        }
    }
}

impl fmt::Display for Spark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spark::Finite(s) => write!(f, "{s}"),
            Spark::NoDependentSubset => write!(f, "none"),
        }
    }
}

impl Serialize for Spark {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Spark::Finite(v) => s.serialize_u64(*v as u64),
            Spark::NoDependentSubset => s.serialize_str("none"),
        }
    }
}

impl<'de> Deserialize<'de> for Spark {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) if v >= 2 => Ok(Spark::Finite(v as usize)),
            Raw::Int(v) => Err(serde::de::Error::custom(format!("spark must be >= 2, got {v}"))),
            Raw::Str(s) if s == "none" => Ok(Spark::NoDependentSubset),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "spark must be an integer or \"none\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparkSearch {
    pub spark: Spark,
    /// Lexicographically first dependent subset of minimal size.
    pub witness: Option<Vec<usize>>,
    /// Subsets whose singular values were computed.
    pub subsets_visited: u128,
}

/// Exact spark by enumeration of column subsets of increasing size.
pub fn spark_exact(dict: &Dictionary, rank_tolerance: f64) -> Result<SparkSearch> {
    spark_exact_budgeted(dict, rank_tolerance, DEFAULT_BUDGET)
}

pub fn spark_exact_budgeted(dict: &Dictionary, rank_tolerance: f64, budget: u128) -> Result<SparkSearch> {
    validate_tolerance(rank_tolerance)?;
    let (n, m) = (dict.n(), dict.m());
    let top = m.min(n);
    let a = dict.matrix();
    let mut visited: u128 = 0;
    for j in 2..=top {
        let level = binomial(m, j);
        if visited.saturating_add(level) > budget {
            return Err(Error::BudgetExceeded {
                required: subset_count(m, 2, top),
                budget,
            });
        }
        visited += level;
        // lexicographically first dependent subset within this level
        let witness = (0..m)
            .into_par_iter()
            .filter_map(|first| {
                let mut rest = Subsets::new(m - first - 1, j - 1);
                let mut idx = vec![first; j];
                while rest.advance() {
                    for (slot, r) in idx[1..].iter_mut().zip(rest.current()) {
                        *slot = first + 1 + r;
                    }
                    if linalg::is_column_dependent(&linalg::columns(a, &idx), rank_tolerance) {
                        return Some(idx);
                    }
                }
                None
            })
            .min();
        if let Some(w) = witness {
            return Ok(SparkSearch {
                spark: Spark::Finite(j),
                witness: Some(w),
                subsets_visited: visited,
            });
        }
    }
    if m > n {
        // any n + 1 columns in n dimensions are dependent
        Ok(SparkSearch {
            spark: Spark::Finite(n + 1),
            witness: Some((0..=n).collect()),
            subsets_visited: visited,
        })
    } else {
        Ok(SparkSearch {
            spark: Spark::NoDependentSubset,
            witness: None,
            subsets_visited: visited,
        })
    }
}

/// Kruskal rank of the dictionary (`spark - 1`, or `m` with full column rank).
pub fn kruskal_rank(dict: &Dictionary, rank_tolerance: f64) -> Result<usize> {
    Ok(spark_exact(dict, rank_tolerance)?.spark.kruskal_rank(dict.m()))
}

/// `sigma_min(j)` for `j = 1..=q`: the smallest singular value over all
/// `j`-column submatrices. Exhaustive; fails when the total subset count
/// exceeds `budget`.
pub fn sigma_min_profile(dict: &Dictionary, q: usize, budget: u128) -> Result<Vec<f64>> {
    let m = dict.m();
    if q > m.min(dict.n()) {
        return Err(Error::InvalidParameter(format!(
            "q = {q} exceeds min(n, m) = {}",
            m.min(dict.n())
        )));
    }
    let required = subset_count(m, 1, q);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let a = dict.matrix();
    let profile = (1..=q)
        .map(|j| {
            (0..m)
                .into_par_iter()
                .map(|first| {
                    let mut rest = Subsets::new(m - first - 1, j - 1);
                    let mut idx = vec![first; j];
                    let mut best = f64::INFINITY;
                    while rest.advance() {
                        for (slot, r) in idx[1..].iter_mut().zip(rest.current()) {
                            *slot = first + 1 + r;
                        }
                        let (lo, _) = linalg::extreme_singular_values(&linalg::columns(a, &idx));
                        best = best.min(lo);
                    }
                    best
                })
                .reduce(|| f64::INFINITY, f64::min)
        })
        .collect();
    Ok(profile)
}

/// Everything the stability bounds need to know about a dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryCertificate {
    #[serde(serialize_with = "ser_f64")]
    pub coherence: f64,
    pub spark: Spark,
    pub kruskal_rank: usize,
    #[serde(serialize_with = "ser_vec_f64")]
    pub sigma_profile: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub rank_tolerance: f64,
    pub dictionary_label: String,
    #[serde(skip)]
    pub spark_witness: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateOptions {
    pub rank_tolerance: f64,
    pub budget: u128,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl DictionaryCertificate {
    pub fn compute(dict: &Dictionary, opts: CertificateOptions) -> Result<Self> {
        let search = spark_exact_budgeted(dict, opts.rank_tolerance, opts.budget)?;
        let q = search.spark.kruskal_rank(dict.m());
        let sigma_profile = sigma_min_profile(dict, q, opts.budget)?;
        Ok(DictionaryCertificate {
            coherence: coherence(dict).value,
            spark: search.spark,
            kruskal_rank: q,
            sigma_profile,
            rank_tolerance: opts.rank_tolerance,
            dictionary_label: dict.label().to_string(),
            spark_witness: search.witness,
        })
    }

    /// `sigma_min(j)`, with `sigma_min(0) = 1`. `None` for `j > q`.
    pub fn sigma_min(&self, j: usize) -> Option<f64> {
        match j {
            0 => Some(1.0),
            j if j <= self.sigma_profile.len() => Some(self.sigma_profile[j - 1]),
            _ => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cert: DictionaryCertificate = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if cert.sigma_profile.len() != cert.kruskal_rank {
            return Err(Error::Parse {
                line: 0,
                column: 0,
                message: format!(
                    "sigma_profile has {} entries but kruskal_rank is {}",
                    cert.sigma_profile.len(),
                    cert.kruskal_rank
                ),
            });
        }
        if let Spark::Finite(s) = cert.spark {
            if s != cert.kruskal_rank + 1 {
                return Err(Error::Parse {
                    line: 0,
                    column: 0,
                    message: format!("spark {s} inconsistent with kruskal_rank {}", cert.kruskal_rank),
                });
            }
        }
        Ok(cert)
    }
}

/// Sparsity threshold that may be unbounded (orthonormal dictionaries).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Finite(usize),
    Unbounded,
}

impl Threshold {
    pub fn allows(self, k: usize) -> bool {
        match self {
            Threshold::Finite(t) => k <= t,
            Threshold::Unbounded => true,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(t) => write!(f, "{t}"),
            Threshold::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// Largest `k` with `k < spark / 2`.
pub fn uniqueness_threshold(spark: usize) -> Result<usize> {
    if spark < 2 {
        return Err(Error::InvalidParameter(format!("spark must be >= 2, got {spark}")));
    }
    Ok(spark.div_ceil(2) - 1)
}

/// Largest integer strictly below `t`. A `t` within `1e-12 * t` of an integer
/// is snapped to it so that exact boundary cases are not lost to rounding.
fn largest_int_below(t: f64) -> usize {
    let r = t.round();
    let t = if (t - r).abs() <= 1e-12 * t.abs().max(1.0) {
        r
    } else {
        t
    };
    (t.ceil() as usize).saturating_sub(1)
}

fn validate_coherence(m: f64) -> Result<()> {
    if !m.is_finite() || !(0.0..=1.0 + 1e-12).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "coherence must lie in [0, 1], got {m}"
        )));
    }
    Ok(())
}

/// Largest `k` with `k < (1 + 1/M) / 2`.
pub fn equivalence_threshold(m: f64) -> Result<Threshold> {
    validate_coherence(m)?;
    if m == 0.0 {
        return Ok(Threshold::Unbounded);
    }
    Ok(Threshold::Finite(largest_int_below((1.0 + 1.0 / m) / 2.0)))
}

/// Largest `k` with `k < (1 + 1/M) / 4`, the sparsity level under which the
/// l1 noise-aware problem is known to be stable.
pub fn p1_delta_threshold(m: f64) -> Result<Threshold> {
    validate_coherence(m)?;
    if m == 0.0 {
        return Ok(Threshold::Unbounded);
    }
    Ok(Threshold::Finite(largest_int_below((1.0 + 1.0 / m) / 4.0)))
}

/// Sparsity `k` of the ground truth with noise budget `epsilon` and
/// decomposition slack `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
}

impl BoundInputs {
    pub fn new(k: usize, epsilon: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("delta", delta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(BoundInputs { k, epsilon, delta })
    }

    fn slack(&self) -> f64 {
        self.epsilon + self.delta
    }
}

/// `(eps + delta) / sqrt(1 - M (2k - 1))`, valid when `k < (1 + 1/M) / 2`.
pub fn donoho_stability_bound(inputs: BoundInputs, m: f64) -> Result<f64> {
    validate_coherence(m)?;
    let denom = 1.0 - m * (2.0 * inputs.k as f64 - 1.0);
    if denom <= 0.0 {
        return Err(Error::PreconditionViolated(format!(
            "k = {} does not satisfy k < (1 + 1/M)/2 for M = {m}",
            inputs.k
        )));
    }
    Ok(inputs.slack() / denom.sqrt())
}

/// `(delta + eps) / sigma_min(2k)`, valid when `2k <= q`.
pub fn main_stability_bound(inputs: BoundInputs, cert: &DictionaryCertificate) -> Result<f64> {
    let ell = 2 * inputs.k;
    let sigma = cert.sigma_min(ell).ok_or_else(|| {
        Error::PreconditionViolated(format!("2k = {ell} exceeds the Kruskal rank q = {}", cert.kruskal_rank))
    })?;
    Ok(inputs.slack() / sigma)
}

/// `(delta + eps) / sigma_min(q)`; needs no knowledge of `k`.
pub fn looser_bound(inputs: BoundInputs, cert: &DictionaryCertificate) -> f64 {
    let sigma = cert.sigma_min(cert.kruskal_rank).expect("profile covers q");
    inputs.slack() / sigma
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    pub ell: usize,
    #[serde(serialize_with = "crate::numfmt::ser_opt_f64")]
    pub main_bound: Option<f64>,
    /// `None` when the coherence bound is inapplicable.
    #[serde(serialize_with = "crate::numfmt::ser_opt_f64")]
    pub donoho_bound: Option<f64>,
    /// `sigma_min(ell)^2 + M (ell - 1) - 1`, when `1 <= ell <= q` and `ell < 1 + 1/M`.
    #[serde(serialize_with = "crate::numfmt::ser_opt_f64")]
    pub tightness_margin: Option<f64>,
    pub tightness_ok: Option<bool>,
    pub equality: bool,
    /// main <= donoho + slack, when both apply.
    pub ordering_ok: Option<bool>,
}

/// Coherence-side margin `sigma_min(ell)^2 + M (ell - 1) - 1` for `ell` in
/// range, or `None` when the check does not apply.
pub fn tightness_margin(cert: &DictionaryCertificate, m: f64, ell: usize) -> Option<f64> {
    if ell == 0 || m * (ell as f64 - 1.0) >= 1.0 {
        return None;
    }
    let sigma = cert.sigma_min(ell)?;
    Some(sigma * sigma + m * (ell as f64 - 1.0) - 1.0)
}

pub fn compare_bounds(inputs: BoundInputs, cert: &DictionaryCertificate, m: f64) -> BoundComparison {
    let ell = 2 * inputs.k;
    let main_bound = main_stability_bound(inputs, cert).ok();
    let donoho_bound = donoho_stability_bound(inputs, m).ok();
    let tightness_margin = tightness_margin(cert, m, ell);
    BoundComparison {
        ell,
        main_bound,
        donoho_bound,
        tightness_margin,
        tightness_ok: tightness_margin.map(|g| g >= -TIGHTNESS_TOLERANCE),
        equality: tightness_margin.is_some_and(|g| g.abs() <= EQUALITY_TOLERANCE),
        // the Gershgorin comparison behind the ordering needs ell >= 1
        ordering_ok: match (main_bound, donoho_bound) {
            (Some(a), Some(b)) if ell > 0 => Some(a <= b + ORDERING_TOLERANCE),
            _ => None,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessRow {
    pub ell: usize,
    #[serde(serialize_with = "ser_f64")]
    pub sigma_min: f64,
    #[serde(serialize_with = "ser_f64")]
    pub margin: f64,
    pub ok: bool,
    pub equality: bool,
}

/// The coherence-side tightness check for every `ell` in `1..=q` with `ell < 1 + 1/M`.
pub fn tightness_scan(cert: &DictionaryCertificate) -> Vec<TightnessRow> {
    (1..=cert.kruskal_rank)
        .filter_map(|ell| {
            tightness_margin(cert, cert.coherence, ell).map(|margin| TightnessRow {
                ell,
                sigma_min: cert.sigma_min(ell).unwrap_or(f64::NAN),
                margin,
                ok: margin >= -TIGHTNESS_TOLERANCE,
                equality: margin.abs() <= EQUALITY_TOLERANCE,
            })
        })
        .collect()
}

fn validate_tolerance(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "rank tolerance must lie in (0, 1e-3], got {tol}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plane3() -> Dictionary {
        let h = FRAC_1_SQRT_2;
        Dictionary::from_entries(&[vec![1.0, 0.0, h], vec![0.0, 1.0, h]]).unwrap()
    }

    fn identity(n: usize) -> Dictionary {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect();
        Dictionary::from_entries(&rows).unwrap()
    }

    #[test]
    fn coherence_examples() {
        assert_eq!(coherence(&identity(3)).value, 0.0);
        assert_eq!(coherence(&Dictionary::dirac_hadamard(4).unwrap()).value, 0.5);
        assert!((coherence(&plane3()).value - FRAC_1_SQRT_2).abs() < 1e-15);
        let single = Dictionary::from_entries(&[vec![1.0]]).unwrap();
        assert_eq!(coherence(&single).pair, None);
    }

    #[test]
    fn spark_examples() {
        let s = spark_exact(&plane3(), DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(s.spark, Spark::Finite(3));
        assert_eq!(s.witness, Some(vec![0, 1, 2]));

        let s = spark_exact(&Dictionary::dirac_hadamard(4).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(s.spark, Spark::Finite(4));
        // lexicographically first: e1 + e2 = h1 + h3
        assert_eq!(s.witness, Some(vec![0, 1, 4, 6]));

        let s = spark_exact(&identity(3), DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(s.spark, Spark::NoDependentSubset);
        assert_eq!(s.spark.kruskal_rank(3), 3);
    }

    #[test]
    fn duplicated_atoms_give_spark_two() {
        let d = Dictionary::from_entries(&[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let s = spark_exact(&d, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(s.spark, Spark::Finite(2));
        assert_eq!(coherence(&d).value, 1.0);
    }

    #[test]
    fn spark_rejects_bad_tolerance() {
        assert!(spark_exact(&plane3(), 0.0).is_err());
        assert!(spark_exact(&plane3(), 0.1).is_err());
    }

    #[test]
    fn spark_budget_is_enforced() {
        let d = Dictionary::random_gaussian(6, 12, 1).unwrap();
        assert!(matches!(
            spark_exact_budgeted(&d, DEFAULT_RANK_TOLERANCE, 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn profile_examples() {
        let p = sigma_min_profile(&plane3(), 2, DEFAULT_BUDGET).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!((p[1] - (1.0 - FRAC_1_SQRT_2).sqrt()).abs() < 1e-12);
        assert!((p[1] - 0.541_196_10).abs() < 1e-8);
        assert!(matches!(
            sigma_min_profile(&Dictionary::random_gaussian(8, 12, 1).unwrap(), 8, 100),
            Err(Error::BudgetExceeded {
                required: 3796,
                budget: 100
            })
        ));
    }

    #[test]
    fn thresholds() {
        assert_eq!(uniqueness_threshold(501).unwrap(), 250);
        assert_eq!(uniqueness_threshold(4).unwrap(), 1);
        assert_eq!(uniqueness_threshold(3).unwrap(), 1);
        assert!(uniqueness_threshold(1).is_err());
        assert_eq!(
            equivalence_threshold(1.0 / 500f64.sqrt()).unwrap(),
            Threshold::Finite(11)
        );
        assert_eq!(equivalence_threshold(1.0).unwrap(), Threshold::Finite(0));
        assert_eq!(equivalence_threshold(0.5).unwrap(), Threshold::Finite(1));
        assert_eq!(equivalence_threshold(0.0).unwrap(), Threshold::Unbounded);
        // boundary: (1 + 3)/2 = 2 exactly, so k < 2
        assert_eq!(equivalence_threshold(1.0 / 3.0).unwrap(), Threshold::Finite(1));
        assert_eq!(p1_delta_threshold(1.0 / 500f64.sqrt()).unwrap(), Threshold::Finite(5));
        assert!(equivalence_threshold(-0.1).is_err());
    }

    #[test]
    fn donoho_examples() {
        let b = donoho_stability_bound(BoundInputs::new(1, 0.1, 0.1).unwrap(), 0.5).unwrap();
        assert!((b - 0.282_842_712_474_619).abs() < 1e-12);
        let b = donoho_stability_bound(BoundInputs::new(1, 0.0, 0.0).unwrap(), 0.3).unwrap();
        assert_eq!(b, 0.0);
        assert!(matches!(
            donoho_stability_bound(BoundInputs::new(3, 0.1, 0.1).unwrap(), 0.5),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn main_and_looser_bounds() {
        let cert = DictionaryCertificate::compute(&plane3(), Default::default()).unwrap();
        assert_eq!(cert.kruskal_rank, 2);
        let inputs = BoundInputs::new(1, 0.1, 0.1).unwrap();
        let b = main_stability_bound(inputs, &cert).unwrap();
        assert!((b - 0.369_551_81).abs() < 1e-8, "{b}");
        assert!((looser_bound(inputs, &cert) - b).abs() < 1e-15);
        let zero = BoundInputs::new(1, 0.0, 0.0).unwrap();
        assert_eq!(main_stability_bound(zero, &cert).unwrap(), 0.0);
        assert_eq!(looser_bound(zero, &cert), 0.0);
        // sigma_min(0) = 1
        let k0 = BoundInputs::new(0, 0.1, 0.2).unwrap();
        assert!((main_stability_bound(k0, &cert).unwrap() - 0.3).abs() < 1e-15);

        let dh = DictionaryCertificate::compute(&Dictionary::dirac_hadamard(4).unwrap(), Default::default()).unwrap();
        assert_eq!(dh.kruskal_rank, 3);
        assert!(matches!(
            main_stability_bound(BoundInputs::new(2, 0.1, 0.1).unwrap(), &dh),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn comparison_equality_case() {
        let cert = DictionaryCertificate::compute(&plane3(), Default::default()).unwrap();
        let c = compare_bounds(BoundInputs::new(1, 0.1, 0.1).unwrap(), &cert, cert.coherence);
        assert_eq!(c.ell, 2);
        assert!(c.equality);
        assert_eq!(c.tightness_ok, Some(true));
        assert_eq!(c.ordering_ok, Some(true));

        // dirac_hadamard(4): M = 1/2, ell = 4 >= 1 + 1/M = 3, no checks
        let dh = DictionaryCertificate::compute(&Dictionary::dirac_hadamard(4).unwrap(), Default::default()).unwrap();
        let c = compare_bounds(BoundInputs::new(2, 0.1, 0.1).unwrap(), &dh, dh.coherence);
        assert_eq!(c.donoho_bound, None);
        assert_eq!(c.tightness_margin, None);
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = DictionaryCertificate::compute(&Dictionary::dirac_hadamard(4).unwrap(), Default::default()).unwrap();
        let json = cert.to_json();
        assert!(json.contains("\"spark\": 4"));
        let back = DictionaryCertificate::from_json(&json).unwrap();
        assert_eq!(back.sigma_profile, cert.sigma_profile);
        assert_eq!(back.spark, cert.spark);

        let id = DictionaryCertificate::compute(&identity(3), Default::default()).unwrap();
        let json = id.to_json();
        assert!(json.contains("\"spark\": \"none\""));
        assert_eq!(
            DictionaryCertificate::from_json(&json).unwrap().spark,
            Spark::NoDependentSubset
        );
        assert!(DictionaryCertificate::from_json("{\"coherence\": 1}").is_err());
    }
}
