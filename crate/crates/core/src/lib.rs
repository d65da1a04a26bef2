//! Dictionary certificates, sparse solvers and stability-bound verification
//! for sparse decompositions `x = A s` over overcomplete dictionaries.
//!
//! * [`dictionary`]: construction, validation and the plain-text matrix format.
//! * [`certificate`]: coherence, spark, Kruskal rank, the `sigma_min(j)`
//!   profile, sparsity thresholds and error bounds.
//! * [`solvers`]: exhaustive P0 / P0,delta oracles, l1 minimization, OMP,
//!   SL0 and Robust-SL0.
//! * [`lab`]: noisy instances, trial-by-trial bound verification, seeded
//!   experiments and JSON/CSV reports.

pub mod certificate;
pub mod dictionary;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod numfmt;
pub mod solvers;
pub mod subsets;

pub use certificate::{BoundInputs, DictionaryCertificate, Spark, Threshold};
pub use dictionary::Dictionary;
pub use error::{Error, Result};
pub use solvers::{SolverConfig, SolverKind, SparseSolution};
