//! Small dense linear programs over box-bounded variables, solved with a
//! two-phase tableau simplex using Bland's rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

/// `coeffs . x (= or <=) bound`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, bound: f64) -> Self {
        Self { coeffs, bound }
    }

    /// Left-hand side at `x`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }
}

/// `minimize objective . x + objective_constant` subject to the equality and
/// `<=` rows and `0 <= x <= upper_bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub objective_constant: f64,
    pub eq_constraints: Vec<Constraint>,
    pub ineq_constraints: Vec<Constraint>,
    pub upper_bounds: Vec<f64>,
    /// `(component, radio)` for each column.
    pub variable_map: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub values: Vec<f64>,
    /// Includes `objective_constant`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("malformed linear program: {0}")]
    Malformed(String),
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let rows = self.eq_constraints.iter().chain(&self.ineq_constraints);
        let shapes_ok = self.upper_bounds.len() == n
            && (self.variable_map.is_empty() || self.variable_map.len() == n)
            && rows.clone().all(|r| r.coeffs.len() == n);
        if !shapes_ok {
            return Err(LpError::Malformed("inconsistent dimensions".into()));
        }
        let finite = self.objective.iter().all(|c| c.is_finite())
            && self.objective_constant.is_finite()
            && rows
                .clone()
                .all(|r| r.coeffs.iter().all(|c| c.is_finite()) && !r.bound.is_nan())
            && self.upper_bounds.iter().all(|u| u.is_finite() && *u >= 0.0);
        if !finite {
            return Err(LpError::Malformed("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Rows that no point in the box can satisfy, detectable without pivoting.
    pub fn trivially_infeasible(&self) -> bool {
        let ub = &self.upper_bounds;
        let min_lhs = |r: &Constraint| -> f64 {
            r.coeffs
                .iter()
                .zip(ub)
                .map(|(a, u)| if *a < 0.0 { a * u } else { 0.0 })
                .sum()
        };
        let max_lhs = |r: &Constraint| -> f64 {
            r.coeffs
                .iter()
                .zip(ub)
                .map(|(a, u)| if *a > 0.0 { a * u } else { 0.0 })
                .sum()
        };
        self.ineq_constraints.iter().any(|r| min_lhs(r) > r.bound + FEAS_TOL)
            || self
                .eq_constraints
                .iter()
                .any(|r| min_lhs(r) > r.bound + FEAS_TOL || max_lhs(r) < r.bound - FEAS_TOL)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Whether `x` satisfies every row and bound within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && x.iter()
                .zip(&self.upper_bounds)
                .all(|(v, u)| *v >= -tol && *v <= u + tol)
            && self.eq_constraints.iter().all(|r| (r.value(x) - r.bound).abs() <= tol)
            && self.ineq_constraints.iter().all(|r| r.value(x) <= r.bound + tol)
    }
}

/// Smallest achievable total excess over the `<=` rows, each row's excess
/// divided by its entry in `scales`, subject to the box and equality rows.
/// Returns the total and a point achieving it.
pub fn min_violation(lp: &LinearProgram, scales: &[f64]) -> Result<(f64, Vec<f64>), LpError> {
    lp.check()?;
    let rows = &lp.ineq_constraints;
    if scales.len() != rows.len() || scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(LpError::Malformed("one positive scale per inequality row".into()));
    }
    let n = lp.num_vars();
    let total = n + rows.len();
    let mut objective = vec![0.0; total];
    let mut upper_bounds = lp.upper_bounds.clone();
    let mut ineq = Vec::with_capacity(rows.len());
    for (r, (row, scale)) in rows.iter().zip(scales).enumerate() {
        let max_lhs: f64 = row
            .coeffs
            .iter()
            .zip(&lp.upper_bounds)
            .map(|(a, u)| (a * u).max(0.0))
            .sum();
        objective[n + r] = 1.0 / scale;
        upper_bounds.push((max_lhs - row.bound).max(0.0));
        let mut coeffs = row.coeffs.clone();
        coeffs.resize(total, 0.0);
        coeffs[n + r] = -1.0;
        ineq.push(Constraint::new(coeffs, row.bound));
    }
    let eq = lp
        .eq_constraints
        .iter()
        .map(|row| {
            let mut coeffs = row.coeffs.clone();
            coeffs.resize(total, 0.0);
            Constraint::new(coeffs, row.bound)
        })
        .collect();
    let elastic = LinearProgram {
        objective,
        objective_constant: 0.0,
        eq_constraints: eq,
        ineq_constraints: ineq,
        upper_bounds,
        variable_map: Vec::new(),
    };
    let sol = solve_lp(&elastic)?;
    Ok((sol.objective, sol.values[..n].to_vec()))
}

/// Optimal vertex of `lp`, or why there is none.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    if lp.trivially_infeasible() {
        return Err(LpError::Infeasible);
    }
    let n = lp.num_vars();
    if n == 0 {
        return Ok(LpSolution {
            values: Vec::new(),
            objective: lp.objective_constant,
        });
    }
    let mut tableau = Tableau::build(lp);
    let values = tableau.solve(&lp.objective)?;
    Ok(LpSolution {
        objective: lp.evaluate(&values),
        values,
    })
}

enum RowKind {
    /// `a x + s = b` with `b >= 0`: slack starts basic.
    Slack,
    /// Needs an artificial variable to start.
    Artificial,
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
    /// First artificial column; columns at or beyond it are artificial.
    art_start: usize,
    cols: usize,
    upper: Vec<f64>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        // every <= row (including x_j <= u_j) gets a slack
        let mut le_rows: Vec<(Vec<f64>, f64)> = lp
            .ineq_constraints
            .iter()
            .map(|r| (r.coeffs.clone(), r.bound))
            .collect();
        for (j, &u) in lp.upper_bounds.iter().enumerate() {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            le_rows.push((row, u));
        }
        let n_slack = le_rows.len();

        let mut rows: Vec<(Vec<f64>, f64, Option<usize>, RowKind)> = Vec::new();
        for (s, (coeffs, bound)) in le_rows.into_iter().enumerate() {
            if bound >= 0.0 {
                rows.push((coeffs, bound, Some(s), RowKind::Slack));
            } else {
                rows.push((coeffs, bound, Some(s), RowKind::Artificial));
            }
        }
        for r in &lp.eq_constraints {
            rows.push((r.coeffs.clone(), r.bound, None, RowKind::Artificial));
        }

        let n_art = rows.iter().filter(|r| matches!(r.3, RowKind::Artificial)).count();
        let art_start = n + n_slack;
        let cols = art_start + n_art;
        let mut a = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut next_art = art_start;
        for (coeffs, bound, slack, kind) in rows {
            let mut row = vec![0.0; cols + 1];
            row[..n].copy_from_slice(&coeffs);
            if let Some(s) = slack {
                row[n + s] = 1.0;
            }
            row[cols] = bound;
            // scale so the largest structural coefficient is 1
            let scale = row[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 {
                for v in row.iter_mut() {
                    *v /= scale;
                }
            }
            if row[cols] < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
            match kind {
                RowKind::Slack => basis.push(n + slack.expect("slack row")),
                RowKind::Artificial => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            a.push(row);
        }
        Self {
            a,
            basis,
            n,
            art_start,
            cols,
            upper: lp.upper_bounds.clone(),
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.a[row].clone();
        for (r, other) in self.a.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = other[col];
            if f != 0.0 {
                for (v, pv) in other.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                other[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes `cost . x` over the current basis; columns `>= allowed` never enter.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<(), LpError> {
        let rhs = self.cols;
        loop {
            // reduced costs: c_j - c_B B^-1 A_j
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = self.a.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum();
                cost[j] - z < -PIVOT_TOL
            });
            let Some(col) = entering else { return Ok(()) };

            let mut leave: Option<(usize, f64)> = None;
            for (r, row) in self.a.iter().enumerate() {
                if row[col] > PIVOT_TOL {
                    let ratio = row[rhs] / row[col];
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((best, best_ratio)) => {
                            let tie = (ratio - best_ratio).abs() <= PIVOT_TOL * (1.0 + best_ratio.abs());
                            if ratio < best_ratio && !tie || tie && self.basis[r] < self.basis[best] {
                                Some((r, ratio))
                            } else {
                                Some((best, best_ratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(LpError::Unbounded),
            }
        }
    }

    fn solve(&mut self, objective: &[f64]) -> Result<Vec<f64>, LpError> {
        let rhs = self.cols;
        if self.art_start < self.cols {
            let mut phase1 = vec![0.0; self.cols];
            for c in phase1.iter_mut().skip(self.art_start) {
                *c = 1.0;
            }
            self.optimize(&phase1, self.cols)?;
            let infeasibility: f64 = self
                .a
                .iter()
                .zip(&self.basis)
                .filter(|(_, &b)| b >= self.art_start)
                .map(|(row, _)| row[rhs])
                .sum();
            if infeasibility > FEAS_TOL {
                return Err(LpError::Infeasible);
            }
            // drive zero-valued artificials out of the basis; drop redundant rows
            let mut r = 0;
            while r < self.a.len() {
                if self.basis[r] >= self.art_start {
                    match (0..self.art_start).find(|&j| self.a[r][j].abs() > PIVOT_TOL) {
                        Some(col) => self.pivot(r, col),
                        None => {
                            self.a.remove(r);
                            self.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }

        let mut cost = vec![0.0; self.cols];
        cost[..self.n].copy_from_slice(objective);
        self.optimize(&cost, self.art_start)?;

        let mut x = vec![0.0; self.n];
        for (row, &b) in self.a.iter().zip(&self.basis) {
            if b < self.n {
                x[b] = row[rhs];
            }
        }
        for (v, u) in x.iter_mut().zip(&self.upper) {
            *v = v.clamp(0.0, *u);
        }
        Ok(x)
    }
}
