mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use sparse_stability::certificate::{
    compare_bounds, equivalence_threshold, looser_bound, main_stability_bound, p1_delta_threshold, spark_exact,
    tightness_scan, uniqueness_threshold, BoundInputs, CertificateOptions, DictionaryCertificate, Threshold,
    DEFAULT_RANK_TOLERANCE,
};
use sparse_stability::lab::{gen_noise, run_trial, CoefficientDist, DictionarySource, TrialSpec};
use sparse_stability::numfmt::fmt17;
use sparse_stability::{Dictionary, SolverConfig, SolverKind, Spark};

fn cert(d: &Dictionary) -> DictionaryCertificate {
    DictionaryCertificate::compute(d, CertificateOptions::default()).unwrap()
}

/// Gaussian dictionary with an optional planted dependency: the last atom is
/// replaced by a normalized combination of the first `planted` atoms.
fn planted(n: usize, m: usize, seed: u64, planted: usize) -> Dictionary {
    let d = Dictionary::random_gaussian(n, m, seed).unwrap();
    if planted == 0 || planted >= m {
        return d;
    }
    let mut a: DMatrix<f64> = d.matrix().clone();
    let mut v = a.column(0).into_owned();
    for j in 1..planted {
        v += a.column(j) * (1.0 + j as f64 * 0.37);
    }
    let v = v.normalize();
    a.set_column(m - 1, &v);
    Dictionary::from_matrix(a, "planted").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spark_matches_naive_oracle(n in 2usize..6, extra in 0usize..4, seed in any::<u64>(), plant in 0usize..4) {
        let m = (n + extra).min(10);
        let d = planted(n, m, seed, plant);
        let fast = spark_exact(&d, DEFAULT_RANK_TOLERANCE).unwrap();
        let naive = common::naive_spark(&d, 1e-9);
        match fast.spark {
            Spark::Finite(s) => {
                prop_assert_eq!(Some(s), naive);
                let w = fast.witness.unwrap();
                prop_assert_eq!(w.len(), s);
            }
            Spark::NoDependentSubset => prop_assert_eq!(naive, None),
        }
    }

    #[test]
    fn profile_positive_and_non_increasing(n in 3usize..7, extra in 1usize..4, seed in any::<u64>()) {
        let d = Dictionary::random_gaussian(n, n + extra, seed).unwrap();
        let c = cert(&d);
        prop_assert_eq!(c.sigma_profile.len(), c.kruskal_rank);
        prop_assert!((c.sigma_profile[0] - 1.0).abs() <= 1e-12);
        for w in c.sigma_profile.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!(c.sigma_profile.iter().all(|&s| s > 0.0));
        for (j, &s) in c.sigma_profile.iter().enumerate() {
            let oracle = common::sigma_min_eig(&d, j + 1);
            prop_assert!((s - oracle).abs() <= 1e-8 * s.max(1.0), "j={} {} vs {}", j + 1, s, oracle);
        }
    }

    #[test]
    fn bounds_are_ordered(n in 3usize..7, extra in 1usize..4, seed in any::<u64>(),
                          eps in 0.0f64..0.2, delta in 0.0f64..0.4) {
        let d = Dictionary::random_gaussian(n, n + extra, seed).unwrap();
        let c = cert(&d);
        for k in 0..=c.kruskal_rank / 2 {
            let inputs = BoundInputs::new(k, eps, delta).unwrap();
            let main = main_stability_bound(inputs, &c).unwrap();
            let loose = looser_bound(inputs, &c);
            prop_assert!(main <= loose * (1.0 + 1e-12) + 1e-15);
            let cmp = compare_bounds(inputs, &c, c.coherence);
            if let Some(ok) = cmp.ordering_ok {
                prop_assert!(ok, "k={} main {:?} donoho {:?}", k, cmp.main_bound, cmp.donoho_bound);
            }
            // sparser ground truth never has a larger bound
            if k >= 1 {
                let prev = main_stability_bound(BoundInputs::new(k - 1, eps, delta).unwrap(), &c).unwrap();
                prop_assert!(prev <= main * (1.0 + 1e-12) + 1e-15);
            }
        }
    }

    #[test]
    fn coherence_side_tightness(n in 2usize..7, extra in 0usize..4, seed in any::<u64>()) {
        let d = Dictionary::random_gaussian(n, n + extra, seed).unwrap();
        let c = cert(&d);
        for row in tightness_scan(&c) {
            prop_assert!(row.ok, "ell={} margin={}", row.ell, row.margin);
            prop_assert!(row.sigma_min * row.sigma_min + c.coherence * (row.ell as f64 - 1.0) >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn equivalence_threshold_is_largest_admissible(inv in 1.0f64..1000.0) {
        let m = 1.0 / inv;
        let limit = (1.0 + inv) / 2.0;
        let Threshold::Finite(t) = equivalence_threshold(m).unwrap() else {
            return Err(TestCaseError::fail("finite coherence gave unbounded threshold"));
        };
        prop_assert!((t as f64) < limit + 1e-9);
        prop_assert!(((t + 1) as f64) >= limit - 1e-9);
        let Threshold::Finite(p) = p1_delta_threshold(m).unwrap() else {
            return Err(TestCaseError::fail("unbounded"));
        };
        prop_assert!((p as f64) < (1.0 + inv) / 4.0 + 1e-9 && ((p + 1) as f64) >= (1.0 + inv) / 4.0 - 1e-9);
        prop_assert!(p <= t);
    }

    #[test]
    fn uniqueness_threshold_is_largest_admissible(s in 2usize..100_000) {
        let t = uniqueness_threshold(s).unwrap();
        prop_assert!(2 * t < s && 2 * (t + 1) >= s);
    }

    #[test]
    fn fmt17_round_trips(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let s = fmt17(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), if x == 0.0 { 0.0 } else { x });
    }

    #[test]
    fn noise_has_exact_norm(dim in 1usize..20, eps in 0.0f64..10.0, seed in any::<u64>()) {
        let v = gen_noise(dim, eps, seed).unwrap();
        prop_assert!((v.norm() - eps).abs() <= 1e-12 * eps.max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trial_results_are_deterministic(seed in any::<u64>(), stream in 0u64..1000, k in 1usize..4) {
        let spec = TrialSpec {
            dictionary: DictionarySource::Gaussian { n: 6, m: 9, seed: 5 },
            k,
            coefficients: CoefficientDist::default(),
            epsilon: 0.01,
            delta: 0.02,
            solvers: vec![SolverKind::ExhaustiveP0Delta, SolverKind::Omp, SolverKind::RobustSl0],
            solver_config: SolverConfig::default(),
            seed,
            stream,
        };
        let a = run_trial(&spec).unwrap().to_json();
        let b = run_trial(&spec).unwrap().to_json();
        prop_assert_eq!(a, b);
    }
}
