//! Noisy sparse instances, trial-by-trial verification of the stability
//! bounds, seeded grid experiments and their JSON/CSV reports.

mod experiment;
mod instance;
mod report;
mod trial;
mod verify;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentOutcome, DEFAULT_CONFIG_JSON};
pub use instance::{
    gen_noise, gen_noise_with, gen_sparse_signal, gen_sparse_signal_with, trial_rng, CoefficientDist, NoisyInstance,
    SignScheme,
};
pub use report::{
    aggregate_report, csv_string, write_csv, ChainTally, CheckTally, ExperimentReport, RatioStats, SolverSummary,
    TightnessSummary, CSV_HEADER,
};
pub use trial::{run_trial, run_trial_in, DictionarySource, SolverRecord, TrialContext, TrialResult, TrialSpec};
pub use verify::{
    verify_coherence_bound, verify_general_bound, verify_looser_bound, verify_main_bound, verify_proof_chain,
    verify_uniqueness, BoundCheck, ChainCheck, CheckStatus, DifferenceWitness, UniquenessCheck, CHECK_TOLERANCE,
};
