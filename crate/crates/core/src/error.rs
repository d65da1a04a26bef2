use thiserror::Error;

/// Errors produced by the library.
///
/// Every variant maps onto a stable machine-readable code (see [`Error::code`]),
/// which the CLI prints and converts into an exit status.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rows have unequal lengths: row {row} has {found} entries, expected {expected}")]
    NonRectangular { row: usize, expected: usize, found: usize },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("column {column} has norm {norm:.17e}, expected 1 within {tolerance:e}")]
    ColumnNotUnitNorm { column: usize, norm: f64, tolerance: f64 },

    #[error("column {column} is (numerically) zero and cannot be normalized")]
    ZeroColumn { column: usize },

    #[error("n = {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("empty matrix: dimensions must be at least 1x1")]
    EmptyMatrix,

    #[error("I/O failure on {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse failure at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("enumeration budget exceeded: {required} subsets required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("support of size {size} is too large: {reason}")]
    SupportTooLarge { size: usize, reason: String },

    #[error("no solution found within budget (searched supports up to size {max_support})")]
    NoSolutionWithinBudget { max_support: usize },

    #[error("solver {solver} did not converge: {message}")]
    NotConverged { solver: String, message: String },

    #[error("signal is not in the column span of the dictionary (residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),
}

impl Error {
    /// Stable upper-snake-case identifier for this error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonRectangular { .. } => "NON_RECTANGULAR",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::ColumnNotUnitNorm { .. } => "COLUMN_NOT_UNIT_NORM",
            Error::ZeroColumn { .. } => "ZERO_COLUMN",
            Error::NotPowerOfTwo(_) => "NOT_POWER_OF_TWO",
            Error::EmptyMatrix => "EMPTY_MATRIX",
            Error::Io { .. } => "IO_FAILURE",
            Error::Parse { .. } => "PARSE_FAILURE",
            Error::BudgetExceeded { .. } => "BUDGET_EXCEEDED",
            Error::SupportTooLarge { .. } => "SUPPORT_TOO_LARGE",
            Error::NoSolutionWithinBudget { .. } => "NO_SOLUTION_WITHIN_BUDGET",
            Error::NotConverged { .. } => "NOT_CONVERGED",
            Error::Infeasible { .. } => "INFEASIBLE",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::PreconditionViolated(_) => "PRECONDITION_VIOLATED",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::EmptyInput(_) => "EMPTY_INPUT",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
