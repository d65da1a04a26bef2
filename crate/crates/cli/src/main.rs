use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sparse_stability::certificate::{
    donoho_stability_bound, equivalence_threshold, looser_bound, main_stability_bound, p1_delta_threshold,
    uniqueness_threshold, CertificateOptions, DEFAULT_BUDGET, DEFAULT_RANK_TOLERANCE,
};
use sparse_stability::dictionary::parse_vector_text;
use sparse_stability::lab::{run_experiment, ExperimentConfig, ExperimentOutcome};
use sparse_stability::numfmt::fmt17;
use sparse_stability::{
    BoundInputs, Dictionary, DictionaryCertificate, Error, SolverConfig, SolverKind, Spark, SparseSolution,
};

#[derive(Parser)]
#[command(
    name = "sparse-stability",
    version,
    about = "Dictionary certificates, sparse solvers and stability-bound experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the certificate (coherence, spark, Kruskal rank, sigma_min profile) of a matrix file.
    Analyze {
        matrix: PathBuf,
        /// Maximum number of column subsets to enumerate.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        #[arg(long, default_value_t = DEFAULT_RANK_TOLERANCE)]
        rank_tolerance: f64,
        /// Certificate file (default: `<matrix>.certificate.json`, or `.csv`).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Solve `x = A s` (or `||x - A s|| <= delta`) with one solver.
    Solve {
        matrix: PathBuf,
        signal: PathBuf,
        #[arg(long)]
        solver: SolverKind,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        max_atoms: Option<usize>,
        #[arg(long)]
        residual_target: Option<f64>,
        #[arg(long)]
        max_support: Option<usize>,
        #[arg(long)]
        zero_threshold: Option<f64>,
        #[arg(long)]
        budget: Option<u128>,
        /// JSON file with solver settings; flags given on the command line win.
        #[arg(long)]
        solver_config: Option<PathBuf>,
        /// Solution file (default: `<signal>.solution.json`, or `.csv`).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run a seeded stability experiment and write JSON and CSV reports.
    Experiment {
        /// Experiment config (JSON); the bundled default when omitted.
        config: Option<PathBuf>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        budget: Option<u128>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Report path without extension; `.json` and `.csv` are appended.
        #[arg(long, default_value = "experiment_report")]
        output: PathBuf,
        /// Write only this format (both by default).
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Print the bundled default config and exit.
        #[arg(long)]
        print_default: bool,
    },
    /// Sparsity thresholds from coherence and/or spark, and bound values from a certificate.
    Thresholds {
        #[arg(long)]
        coherence: Option<f64>,
        #[arg(long)]
        spark: Option<usize>,
        /// Certificate JSON written by `analyze`; supplies coherence and spark when not given.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Write a dictionary matrix file.
    Generate {
        #[arg(long, value_enum)]
        kind: DictKind,
        #[arg(long)]
        n: usize,
        /// Number of atoms (gaussian only).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DictKind {
    Gaussian,
    DiracHadamard,
}

/// Exit status for each failure class.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::EmptyInput(_) => 2,
        Error::Io { .. } => 3,
        Error::Parse { .. } | Error::NonRectangular { .. } | Error::NonFinite { .. } => 4,
        Error::ColumnNotUnitNorm { .. } | Error::ZeroColumn { .. } | Error::NotPowerOfTwo(_) | Error::EmptyMatrix => 5,
        Error::BudgetExceeded { .. } | Error::SupportTooLarge { .. } => 6,
        Error::NotConverged { .. } | Error::NoSolutionWithinBudget { .. } | Error::Infeasible { .. } => 7,
        Error::DimensionMismatch { .. } => 8,
        Error::PreconditionViolated(_) => 9,
    }
}

const EXIT_VIOLATIONS: u8 = 10;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: code={} message={message}", e.code());
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Analyze {
            matrix,
            budget,
            rank_tolerance,
            output,
            format,
        } => analyze(&matrix, budget, rank_tolerance, output, format),
        Command::Solve {
            matrix,
            signal,
            solver,
            delta,
            max_atoms,
            residual_target,
            max_support,
            zero_threshold,
            budget,
            solver_config,
            output,
            format,
        } => {
            let mut cfg = match solver_config {
                Some(p) => read_solver_config(&p)?,
                None => SolverConfig::default(),
            };
            if let Some(d) = delta {
                cfg.delta = d;
            }
            if max_atoms.is_some() {
                cfg.omp.max_atoms = max_atoms;
            }
            if residual_target.is_some() {
                cfg.omp.residual_target = residual_target;
            }
            if max_support.is_some() {
                cfg.max_support = max_support;
            }
            if let Some(z) = zero_threshold {
                cfg.zero_threshold = z;
            }
            if let Some(b) = budget {
                cfg.budget = b;
            }
            solve(&matrix, &signal, solver, &cfg, output, format)
        }
        Command::Experiment {
            config,
            seed,
            trials,
            budget,
            workers,
            output,
            format,
            print_default,
        } => {
            if print_default {
                print!("{}", sparse_stability::lab::DEFAULT_CONFIG_JSON);
                return Ok(0);
            }
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::bundled_default(),
            };
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(b) = budget {
                cfg.solver.budget = b;
            }
            experiment(&cfg, workers, &output, format)
        }
        Command::Thresholds {
            coherence,
            spark,
            certificate,
            k,
            epsilon,
            delta,
        } => thresholds(coherence, spark, certificate, k, epsilon, delta),
        Command::Generate {
            kind,
            n,
            m,
            seed,
            output,
        } => {
            let dict = match kind {
                DictKind::Gaussian => {
                    let m = m.ok_or_else(|| Error::InvalidParameter("--m is required for gaussian".into()))?;
                    Dictionary::random_gaussian(n, m, seed)?
                }
                DictKind::DiracHadamard => Dictionary::dirac_hadamard(n)?,
            };
            dict.save(&output)?;
            println!("wrote {}x{} dictionary to {}", dict.n(), dict.m(), output.display());
            Ok(0)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read_file(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read_solver_config(path: &Path) -> Result<SolverConfig, Error> {
    serde_json::from_str(&read_file(path)?).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn default_output(input: &Path, suffix: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Json => "json",
        Format::Csv => "csv",
    };
    let mut s = input.as_os_str().to_owned();
    s.push(format!(".{suffix}.{ext}"));
    PathBuf::from(s)
}

fn spark_uniqueness(spark: Spark) -> String {
    match spark {
        Spark::Finite(s) => uniqueness_threshold(s).map(|t| t.to_string()).unwrap_or_default(),
        Spark::NoDependentSubset => "unbounded".into(),
    }
}

fn analyze(
    matrix: &Path,
    budget: u128,
    rank_tolerance: f64,
    output: Option<PathBuf>,
    format: Format,
) -> Result<u8, Error> {
    let dict = Dictionary::load(matrix)?;
    let cert = DictionaryCertificate::compute(&dict, CertificateOptions { rank_tolerance, budget })?;
    let out = output.unwrap_or_else(|| default_output(matrix, "certificate", format));
    let body = match format {
        Format::Json => cert.to_json() + "\n",
        Format::Csv => {
            let mut s = String::from("j,sigma_min\n");
            for (j, v) in cert.sigma_profile.iter().enumerate() {
                let _ = writeln!(s, "{},{}", j + 1, fmt17(*v));
            }
            s
        }
    };
    write_file(&out, &body)?;

    let q = cert.kruskal_rank;
    println!("dictionary: {} ({}x{})", dict.label(), dict.n(), dict.m());
    println!("coherence M: {}", fmt17(cert.coherence));
    println!("spark: {}", cert.spark);
    println!("kruskal rank q: {q}");
    match cert.sigma_min(q) {
        Some(s) if q > 0 => println!("sigma_min(q): {}", fmt17(s)),
        _ => println!("sigma_min(q): n/a"),
    }
    println!("uniqueness threshold (k < spark/2): {}", spark_uniqueness(cert.spark));
    println!(
        "equivalence threshold (k < (1 + 1/M)/2): {}",
        equivalence_threshold(cert.coherence)?
    );
    println!("certificate written to {}", out.display());
    Ok(0)
}

fn solve(
    matrix: &Path,
    signal: &Path,
    kind: SolverKind,
    cfg: &SolverConfig,
    output: Option<PathBuf>,
    format: Format,
) -> Result<u8, Error> {
    cfg.validate()?;
    let dict = Dictionary::load(matrix)?;
    let x = parse_vector_text(&read_file(signal)?)?;
    if x.len() != dict.n() {
        return Err(Error::DimensionMismatch {
            expected: dict.n(),
            found: x.len(),
        });
    }
    let sol: SparseSolution = sparse_stability::solvers::solve(kind, &dict, &x, cfg)?;
    let out = output.unwrap_or_else(|| default_output(signal, "solution", format));
    let body = match format {
        Format::Json => sol.to_json() + "\n",
        Format::Csv => {
            let mut s = String::from("index,value\n");
            for &i in &sol.support {
                let _ = writeln!(s, "{i},{}", fmt17(sol.coefficients[i]));
            }
            s
        }
    };
    write_file(&out, &body)?;
    println!("solver: {}", sol.solver_name);
    println!("support: {:?}", sol.support);
    println!("l0: {}", sol.l0());
    println!("residual: {}", fmt17(sol.residual_norm));
    println!("converged: {}", sol.converged);
    println!("solution written to {}", out.display());
    Ok(0)
}

fn experiment(cfg: &ExperimentConfig, workers: usize, output: &Path, format: Option<Format>) -> Result<u8, Error> {
    let outcome = run_experiment(cfg, workers)?;
    let with_ext = |ext: &str| {
        let mut s = output.as_os_str().to_owned();
        s.push(format!(".{ext}"));
        PathBuf::from(s)
    };
    let mut written = Vec::new();
    if format != Some(Format::Csv) {
        let p = with_ext("json");
        write_file(&p, &(outcome.to_json() + "\n"))?;
        written.push(p);
    }
    if format != Some(Format::Json) {
        let p = with_ext("csv");
        write_file(&p, &outcome.to_csv()?)?;
        written.push(p);
    }
    print_summary(&outcome);
    for p in &written {
        println!("report written to {}", p.display());
    }
    Ok(if outcome.report.total_violations == 0 {
        0
    } else {
        EXIT_VIOLATIONS
    })
}

fn print_summary(o: &ExperimentOutcome) {
    let c = &o.certificate;
    println!(
        "dictionary {}: M = {}, spark = {}, q = {}",
        c.dictionary_label,
        fmt17(c.coherence),
        c.spark,
        c.kruskal_rank
    );
    println!("trials: {}", o.report.trials);
    println!(
        "{:<20} {:>8} {:>22} {:>22} {:>22} {:>22} {:>18}",
        "solver",
        "failed",
        "coherence (app/viol)",
        "main (app/viol)",
        "looser (app/viol)",
        "general (app/viol)",
        "chain (app/fail)"
    );
    for s in &o.report.solvers {
        let cell = |t: &sparse_stability::lab::CheckTally| format!("{}/{}", t.applicable, t.violations);
        println!(
            "{:<20} {:>8} {:>22} {:>22} {:>22} {:>22} {:>18}",
            s.solver.name(),
            s.failures,
            cell(&s.coherence_bound),
            cell(&s.main_bound),
            cell(&s.looser_bound),
            cell(&s.general_bound),
            format!("{}/{}", s.proof_chain.applicable, s.proof_chain.failed)
        );
    }
    let t = &o.report.tightness;
    println!(
        "tightness: margin checked {} (failures {}, equalities {}), ordering checked {} (failures {})",
        t.margin_checked, t.margin_failures, t.equality_cases, t.ordering_checked, t.ordering_failures
    );
    println!("total violations: {}", o.report.total_violations);
}

fn thresholds(
    coherence: Option<f64>,
    spark: Option<usize>,
    certificate: Option<PathBuf>,
    k: Option<usize>,
    epsilon: f64,
    delta: f64,
) -> Result<u8, Error> {
    let cert = match certificate {
        Some(p) => Some(DictionaryCertificate::from_json(&read_file(&p)?)?),
        None => None,
    };
    let coherence = coherence.or(cert.as_ref().map(|c| c.coherence));
    let spark = match (spark, &cert) {
        (Some(s), _) => Some(Spark::Finite(s)),
        (None, Some(c)) => Some(c.spark),
        (None, None) => None,
    };
    if coherence.is_none() && spark.is_none() {
        return Err(Error::InvalidParameter(
            "give at least one of --coherence, --spark or --certificate".into(),
        ));
    }
    if let Some(s) = spark {
        if let Spark::Finite(v) = s {
            uniqueness_threshold(v)?;
        }
        println!("uniqueness threshold (k < spark/2): {}", spark_uniqueness(s));
    }
    if let Some(m) = coherence {
        println!("equivalence threshold (k < (1 + 1/M)/2): {}", equivalence_threshold(m)?);
        println!("P1,delta threshold (k < (1 + 1/M)/4): {}", p1_delta_threshold(m)?);
    }
    if let (Some(c), Some(k)) = (&cert, k) {
        let inputs = BoundInputs::new(k, epsilon, delta)?;
        let show = |name: &str, v: Result<f64, Error>| match v {
            Ok(b) => println!("{name}: {}", fmt17(b)),
            Err(e) => println!("{name}: not applicable ({e})"),
        };
        show(
            "coherence bound (eps+delta)/sqrt(1-M(2k-1))",
            donoho_stability_bound(inputs, c.coherence),
        );
        show("main bound (eps+delta)/sigma_min(2k)", main_stability_bound(inputs, c));
        show("looser bound (eps+delta)/sigma_min(q)", Ok(looser_bound(inputs, c)));
    }
    Ok(0)
}
