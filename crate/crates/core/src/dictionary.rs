//! Dictionaries: real `n x m` matrices whose columns (atoms) have unit
//! Euclidean norm.
//!
//! Only [`Dictionary::normalize_columns`] and [`Dictionary::random_gaussian`]
//! rescale their input. Every other constructor validates and rejects.
//!
//! # File format
//!
//! ```text
//! # comment lines start with '#'
//! n m
//! a11 a12 ... a1m
//! ...
//! an1 an2 ... anm
//! ```
//!
//! Values are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numfmt::fmt17;

/// Maximum allowed deviation of a column norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// Norm below which a column counts as zero for normalization.
pub const ZERO_COLUMN_TOLERANCE: f64 = 1e-12;

/// Name of the seeded generator behind [`Dictionary::random_gaussian`] and
/// all experiment randomness; recorded in reports.
pub const GENERATOR_NAME: &str = "ChaCha20Rng::seed_from_u64 + rand_distr::StandardNormal";

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    matrix: DMatrix<f64>,
    label: String,
}

impl Dictionary {
    /// Validates `rows` (n rows of m values) without rescaling.
    pub fn from_entries(rows: &[Vec<f64>]) -> Result<Self> {
        let matrix = rows_to_matrix(rows)?;
        Self::from_matrix(matrix, "entries")
    }

    /// Wraps an existing matrix after validating the unit-norm invariant.
    pub fn from_matrix(matrix: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        check_finite(&matrix)?;
        let mut worst: Option<(usize, f64)> = None;
        for (j, col) in matrix.column_iter().enumerate() {
            let norm = col.norm();
            let dev = (norm - 1.0).abs();
            if dev > UNIT_NORM_TOLERANCE && worst.is_none_or(|(_, w)| dev > (w - 1.0).abs()) {
                worst = Some((j, norm));
            }
        }
        if let Some((column, norm)) = worst {
            return Err(Error::ColumnNotUnitNorm {
                column,
                norm,
                tolerance: UNIT_NORM_TOLERANCE,
            });
        }
        Ok(Dictionary {
            matrix,
            label: label.into(),
        })
    }

    /// Divides every column by its Euclidean norm.
    pub fn normalize_columns(rows: &[Vec<f64>]) -> Result<Self> {
        let matrix = rows_to_matrix(rows)?;
        Self::normalized(matrix, "normalized")
    }

    fn normalized(mut matrix: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        check_finite(&matrix)?;
        for (j, mut col) in matrix.column_iter_mut().enumerate() {
            let norm = col.norm();
            if norm <= ZERO_COLUMN_TOLERANCE {
                return Err(Error::ZeroColumn { column: j });
            }
            col /= norm;
        }
        Self::from_matrix(matrix, label)
    }

    /// I.i.d. standard normal entries from a seeded ChaCha20 stream, filled
    /// column by column, then column-normalized.
    pub fn random_gaussian(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "random_gaussian needs n >= 1 and m >= 1, got {n}x{m}"
            )));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * m);
        for _ in 0..n * m {
            data.push(StandardNormal.sample(&mut rng));
        }
        // from_vec is column-major
        let matrix = DMatrix::from_vec(n, m, data);
        Self::normalized(matrix, format!("gaussian(n={n},m={m},seed={seed})"))
    }

    /// `[I | H / sqrt(n)]` with `H` the Sylvester Hadamard matrix of order `n`.
    pub fn dirac_hadamard(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let scale = 1.0 / (n as f64).sqrt();
        let matrix = DMatrix::from_fn(n, 2 * n, |r, c| {
            if c < n {
                if r == c {
                    1.0
                } else {
                    0.0
                }
            } else {
                scale * sylvester_sign(r, c - n)
            }
        });
        Self::from_matrix(matrix, format!("dirac_hadamard(n={n})"))
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn m(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Atom `i` as a column vector.
    pub fn atom(&self, i: usize) -> DVector<f64> {
        self.matrix.column(i).into_owned()
    }

    /// `A s`.
    pub fn apply(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.matrix * s
    }

    /// Text in the matrix file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.label.replace('\n', " "));
        let _ = writeln!(out, "{} {}", self.n(), self.m());
        for r in 0..self.n() {
            let row: Vec<String> = (0..self.m()).map(|c| fmt17(self.matrix[(r, c)])).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let matrix = parse_matrix_text(&text)?;
        Self::from_matrix(matrix, path.display().to_string())
    }

    pub fn from_text(text: &str, label: impl Into<String>) -> Result<Self> {
        Self::from_matrix(parse_matrix_text(text)?, label)
    }
}

fn sylvester_sign(r: usize, c: usize) -> f64 {
    // H[r][c] = (-1)^{popcount(r & c)}
    if (r & c).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_finite(matrix: &DMatrix<f64>) -> Result<()> {
    for c in 0..matrix.ncols() {
        for r in 0..matrix.nrows() {
            if !matrix[(r, c)].is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let m = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(Error::NonRectangular {
                row: i,
                expected: m,
                found: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }
    if m == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(DMatrix::from_fn(n, m, |r, c| rows[r][c]))
}

/// Parses the plain-text matrix format. Line and column numbers in errors are 1-based;
/// the column is the index of the offending token on its line.
pub fn parse_matrix_text(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "missing header `n m`".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            column: 1,
            message: format!("header must be `n m`, found {} tokens", dims.len()),
        });
    }
    let parse_dim = |tok: &str, col: usize| -> Result<usize> {
        tok.parse::<usize>().map_err(|e| Error::Parse {
            line: hline,
            column: col,
            message: format!("invalid dimension `{tok}`: {e}"),
        })
    };
    let n = parse_dim(dims[0], 1)?;
    let m = parse_dim(dims[1], 2)?;
    if n == 0 || m == 0 {
        return Err(Error::Parse {
            line: hline,
            column: 1,
            message: "dimensions must be at least 1".into(),
        });
    }

    let mut data = vec![0.0; n * m];
    let mut last_line = hline;
    for r in 0..n {
        let (lno, line) = lines.next().ok_or_else(|| Error::Parse {
            line: last_line + 1,
            column: 1,
            message: format!("expected {n} data rows, found {r}"),
        })?;
        last_line = lno;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != m {
            return Err(Error::Parse {
                line: lno,
                column: toks.len().min(m) + 1,
                message: format!("expected {m} values, found {}", toks.len()),
            });
        }
        for (c, tok) in toks.iter().enumerate() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lno,
                column: c + 1,
                message: format!("invalid number `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: lno,
                    column: c + 1,
                    message: format!("non-finite number `{tok}`"),
                });
            }
            data[c * n + r] = v;
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(Error::Parse {
            line: lno,
            column: 1,
            message: format!("unexpected data after {n} rows"),
        });
    }
    Ok(DMatrix::from_vec(n, m, data))
}

/// Parses a signal vector: whitespace-separated reals, `#` comment lines skipped.
pub fn parse_vector_text(text: &str) -> Result<DVector<f64>> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for (c, tok) in line.split_whitespace().enumerate() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: i + 1,
                column: c + 1,
                message: format!("invalid number `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: i + 1,
                    column: c + 1,
                    message: format!("non-finite number `{tok}`"),
                });
            }
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty signal".into(),
        });
    }
    Ok(DVector::from_vec(values))
}

pub fn vector_to_text(x: &DVector<f64>) -> String {
    let mut out = String::new();
    for v in x.iter() {
        let _ = writeln!(out, "{}", fmt17(*v));
    }
    out
}
