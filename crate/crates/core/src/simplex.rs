//! Dense two-phase simplex with Bland's rule for
//! `max c.v  s.t.  A v <= b,  lower <= v <= upper`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn free(name: impl Into<String>) -> Self {
        Variable { name: name.into(), lower: f64::NEG_INFINITY, upper: f64::INFINITY }
    }

    pub fn bounded(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Variable { name: name.into(), lower, upper }
    }
}

/// `coeffs . v <= rhs`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    /// Maximized.
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values at the optimum; empty otherwise.
    pub values: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        if self.objective.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.objective.len() });
        }
        for row in &self.rows {
            if row.coeffs.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.coeffs.len() });
            }
            if row.coeffs.iter().any(|c| !c.is_finite()) || !row.rhs.is_finite() {
                return Err(Error::InvalidArgument(format!("row `{}` has a non-finite entry", row.label)));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("objective has a non-finite entry".into()));
        }
        if self.variables.iter().any(|v| v.lower.is_nan() || v.upper.is_nan()) {
            return Err(Error::InvalidArgument("NaN variable bound".into()));
        }
        Ok(())
    }

    /// `rhs - coeffs . values` for every row.
    pub fn slacks(&self, values: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.rhs - r.coeffs.iter().zip(values).map(|(a, v)| a * v).sum::<f64>())
            .collect()
    }
}

/// How an original variable maps onto nonnegative tableau columns:
/// `v = offset + sum(sign * z_col)`.
struct Substitution {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced costs; last entry is minus the objective value.
    cost: Vec<f64>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule iterations over columns `< allowed`. Returns false when
    /// the problem is unbounded in the current objective.
    fn optimize(&mut self, allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] > TOL) else {
                return Ok(true);
            };
            let rhs = self.width;
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter] > TOL {
                    let ratio = row[rhs] / row[enter];
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - TOL || (ratio <= lr + TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
        Err(Error::InvalidArgument("simplex pivot limit reached".into()))
    }
}

/// Solves `lp`. Infeasible and unbounded problems are reported through the
/// status, not as errors.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let infeasible = LpSolution { status: LpStatus::Infeasible, values: Vec::new(), objective: f64::NAN };
    if lp.variables.iter().any(|v| v.lower > v.upper) {
        return Ok(infeasible);
    }

    // Map variables onto nonnegative columns.
    let mut subs = Vec::with_capacity(lp.variables.len());
    let mut n_z = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for v in &lp.variables {
        let sub = match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, upper_finite) => {
                if upper_finite {
                    bound_rows.push((n_z, v.upper - v.lower));
                }
                Substitution { offset: v.lower, terms: vec![(n_z, 1.0)] }
            }
            (false, true) => Substitution { offset: v.upper, terms: vec![(n_z, -1.0)] },
            (false, false) => {
                n_z += 1;
                Substitution { offset: 0.0, terms: vec![(n_z - 1, 1.0), (n_z, -1.0)] }
            }
        };
        n_z += 1;
        subs.push(sub);
    }

    let mut a: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    for row in &lp.rows {
        let mut coeffs = vec![0.0; n_z];
        let mut rhs = row.rhs;
        for (aj, sub) in row.coeffs.iter().zip(&subs) {
            rhs -= aj * sub.offset;
            for &(col, sign) in &sub.terms {
                coeffs[col] += aj * sign;
            }
        }
        a.push(coeffs);
        b.push(rhs);
    }
    for &(col, width) in &bound_rows {
        let mut coeffs = vec![0.0; n_z];
        coeffs[col] = 1.0;
        a.push(coeffs);
        b.push(width);
    }
    let mut c = vec![0.0; n_z];
    for (cj, sub) in lp.objective.iter().zip(&subs) {
        for &(col, sign) in &sub.terms {
            c[col] += cj * sign;
        }
    }

    // Columns: z | slack (one per row) | artificial (rows with negative rhs).
    let m = a.len();
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative.len();
    let width = n_z + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = 0;
    for i in 0..m {
        let mut row = vec![0.0; width + 1];
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n_z {
            row[j] = flip * a[i][j];
        }
        row[n_z + i] = flip;
        row[width] = flip * b[i];
        if b[i] < 0.0 {
            row[n_z + m + art] = 1.0;
            basis.push(n_z + m + art);
            art += 1;
        } else {
            basis.push(n_z + i);
        }
        rows.push(row);
    }

    let mut tab = Tableau { rows, basis, cost: vec![0.0; width + 1], width };

    if n_art > 0 {
        // Phase 1: maximize -sum(artificials).
        for j in (n_z + m)..width {
            tab.cost[j] = -1.0;
        }
        for &i in &negative {
            for j in 0..=width {
                tab.cost[j] += tab.rows[i][j];
            }
        }
        tab.optimize(width)?;
        // cost[width] holds the remaining sum of artificials.
        let scale = b.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        if tab.cost[width] > 1e-9 * scale {
            return Ok(infeasible);
        }
        // Drive remaining artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] >= n_z + m {
                if let Some(j) = (0..n_z + m).find(|&j| tab.rows[r][j].abs() > TOL) {
                    tab.pivot(r, j);
                }
            }
        }
    }

    // Phase 2: reduced costs of the real objective.
    let mut cost = vec![0.0; width + 1];
    cost[..n_z].copy_from_slice(&c);
    for (i, &bj) in tab.basis.iter().enumerate() {
        let cb = if bj < n_z { c[bj] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..=width {
                cost[j] -= cb * tab.rows[i][j];
            }
        }
    }
    tab.cost = cost;
    if !tab.optimize(n_z + m)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, values: Vec::new(), objective: f64::INFINITY });
    }

    let mut z = vec![0.0; n_z];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < n_z {
            z[bj] = tab.rows[i][width];
        }
    }
    let values: Vec<f64> = subs
        .iter()
        .map(|s| s.offset + s.terms.iter().map(|&(col, sign)| sign * z[col]).sum::<f64>())
        .collect();
    let objective = lp.objective.iter().zip(&values).map(|(c, v)| c * v).sum();
    Ok(LpSolution { status: LpStatus::Optimal, values, objective })
}
