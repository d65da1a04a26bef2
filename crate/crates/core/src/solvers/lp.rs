//! Dense two-phase tableau simplex for `min c'y  s.t.  M y = b, y >= 0`,
//! with Bland's rule so degenerate problems terminate.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpError {
    Infeasible(f64),
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub y: DVector<f64>,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;

struct Tableau {
    // rows 0..r: constraints, row r: reduced costs; last column: rhs
    t: DMatrix<f64>,
    basis: Vec<usize>,
    rows: usize,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[(i, self.cols)]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[(row, col)];
        let width = self.cols + 1;
        for j in 0..width {
            self.t[(row, j)] /= p;
        }
        for i in 0..=self.rows {
            if i == row {
                continue;
            }
            let f = self.t[(i, col)];
            if f != 0.0 {
                for j in 0..width {
                    let v = self.t[(row, j)];
                    self.t[(i, j)] -= f * v;
                }
            }
        }
        self.basis[row] = col;
    }

    /// `max(1, max_i |t_ij|)`: reduced costs carry roundoff proportional to it.
    fn column_scale(&self, j: usize) -> f64 {
        (0..self.rows).fold(1.0, |acc: f64, i| acc.max(self.t[(i, j)].abs()))
    }

    /// Loads the objective row as reduced costs for `cost` under the current basis.
    fn set_objective(&mut self, cost: &[f64]) {
        let r = self.rows;
        for j in 0..=self.cols {
            let mut v = if j < self.cols { cost[j] } else { 0.0 };
            for i in 0..r {
                v -= cost[self.basis[i]] * self.t[(i, j)];
            }
            self.t[(r, j)] = v;
        }
    }

    /// Bland's rule iterations; `allowed(j)` filters entering columns. Basic
    /// variables with index `>= pinned_from` are held at zero: any nonzero
    /// entry in their row blocks the entering column.
    fn run(
        &mut self,
        allowed: impl Fn(usize) -> bool,
        pinned_from: usize,
        limit: usize,
        iters: &mut usize,
    ) -> Result<(), LpError> {
        let r = self.rows;
        loop {
            let Some(enter) = (0..self.cols).find(|&j| allowed(j) && self.t[(r, j)] < -COST_TOL * self.column_scale(j))
            else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..r {
                let a = self.t[(i, enter)];
                let pinned = self.basis[i] >= pinned_from;
                if a > PIVOT_TOL || (pinned && a < -PIVOT_TOL) {
                    let ratio = if pinned { 0.0 } else { self.rhs(i) / a };
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14 * lr.abs().max(1.0)
                                || (ratio <= lr + 1e-14 * lr.abs().max(1.0) && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, enter);
            *iters += 1;
            if *iters > limit {
                return Err(LpError::IterationLimit);
            }
        }
    }
}

pub(crate) fn solve_standard_form(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    cost: &[f64],
    limit: usize,
) -> Result<LpSolution, LpError> {
    let rows = m.nrows();
    let nvar = m.ncols();
    let cols = nvar + rows;
    let mut t = DMatrix::zeros(rows + 1, cols + 1);
    for i in 0..rows {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..nvar {
            t[(i, j)] = sign * m[(i, j)];
        }
        t[(i, nvar + i)] = 1.0;
        t[(i, cols)] = sign * b[i];
    }
    let mut tab = Tableau {
        t,
        basis: (nvar..cols).collect(),
        rows,
        cols,
    };
    let mut iters = 0;

    let phase1: Vec<f64> = (0..cols).map(|j| if j >= nvar { 1.0 } else { 0.0 }).collect();
    tab.set_objective(&phase1);
    tab.run(|_| true, cols, limit, &mut iters)?;
    let infeas: f64 = (0..rows)
        .filter(|&i| tab.basis[i] >= nvar)
        .map(|i| tab.rhs(i).abs())
        .sum();
    let scale = 1.0 + b.amax();
    if infeas > 1e-9 * scale {
        return Err(LpError::Infeasible(infeas));
    }
    // drive zero-level artificials out of the basis where possible, pivoting
    // on the largest available entry
    for i in 0..rows {
        if tab.basis[i] >= nvar {
            let best = (0..nvar)
                .map(|j| (j, tab.t[(i, j)].abs()))
                .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            if best.1 > 1e-9 {
                tab.pivot(i, best.0);
            }
        }
    }

    let mut phase2 = cost.to_vec();
    phase2.resize(cols, 0.0);
    tab.set_objective(&phase2);
    tab.run(|j| j < nvar, nvar, limit, &mut iters)?;

    let mut y = DVector::zeros(nvar);
    for i in 0..rows {
        if tab.basis[i] < nvar {
            y[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    Ok(LpSolution { y, iterations: iters })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min -x1 - x2  s.t. x1 + 2 x2 + s1 = 4, 3 x1 + x2 + s2 = 6
        let m = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 1.0, 0.0, 3.0, 1.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![4.0, 6.0]);
        let sol = solve_standard_form(&m, &b, &[-1.0, -1.0, 0.0, 0.0], 100).unwrap();
        assert!((sol.y[0] - 1.6).abs() < 1e-12);
        assert!((sol.y[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x1 + x2 = -1 with y >= 0
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![-1.0]);
        assert!(matches!(
            solve_standard_form(&m, &b, &[1.0, 1.0], 100),
            Err(LpError::Infeasible(_))
        ));
        // x1 - x2 = 1, min -x1
        let m = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0]);
        assert_eq!(
            solve_standard_form(&m, &b, &[-1.0, 0.0], 100).unwrap_err(),
            LpError::Unbounded
        );
    }

    #[test]
    fn redundant_rows() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let sol = solve_standard_form(&m, &b, &[1.0, 2.0], 100).unwrap();
        assert!((sol.y[0] - 1.0).abs() < 1e-12 && sol.y[1].abs() < 1e-12);
    }
}
