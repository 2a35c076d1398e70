//! Brute-force reference for `max c.x  s.t.  A x <= b,  x >= 0`: enumerate
//! every basic solution, and every extreme ray of the recession cone to
//! detect unboundedness.

use fmrbench_core::linalg::solve_square;
use fmrbench_core::simplex::{LinearProgram, LpStatus, Row, Variable};
use ndarray::{Array1, Array2};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct DenseLp {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl DenseLp {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn to_program(&self) -> LinearProgram {
        LinearProgram {
            variables: (0..self.n()).map(|i| Variable::bounded(format!("x{i}"), 0.0, f64::INFINITY)).collect(),
            objective: self.c.clone(),
            rows: self
                .a
                .iter()
                .zip(&self.b)
                .enumerate()
                .map(|(i, (a, b))| Row { label: format!("r{i}"), coeffs: a.clone(), rhs: *b })
                .collect(),
        }
    }

    /// Rows of A followed by `-x_i <= 0`.
    fn all_constraints(&self) -> Vec<(Vec<f64>, f64)> {
        let n = self.n();
        let mut g: Vec<(Vec<f64>, f64)> = self.a.iter().cloned().zip(self.b.iter().copied()).collect();
        for i in 0..n {
            let mut row = vec![0.0; n];
            row[i] = -1.0;
            g.push((row, 0.0));
        }
        g
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub struct OracleResult {
    pub status: LpStatus,
    pub objective: f64,
}

pub fn enumerate(lp: &DenseLp) -> OracleResult {
    let n = lp.n();
    let g = lp.all_constraints();
    let feas_tol = 1e-9;

    let mut best: Option<f64> = None;
    for subset in combinations(g.len(), n) {
        let m = Array2::from_shape_fn((n, n), |(i, j)| g[subset[i]].0[j]);
        let h = Array1::from_iter(subset.iter().map(|&i| g[i].1));
        let Some(x) = solve_square(&m, &h) else { continue };
        let x = x.to_vec();
        if g.iter().all(|(row, rhs)| dot(row, &x) <= rhs + feas_tol) {
            let v = dot(&lp.c, &x);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    let Some(best) = best else {
        return OracleResult { status: LpStatus::Infeasible, objective: f64::NAN };
    };

    // Extreme rays of {d : A d <= 0, d >= 0} normalized by sum(d) = 1.
    let cone: Vec<Vec<f64>> = g.iter().map(|(row, _)| row.clone()).collect();
    for subset in combinations(cone.len(), n - 1) {
        let m = Array2::from_shape_fn((n, n), |(i, j)| if i < n - 1 { cone[subset[i]][j] } else { 1.0 });
        let mut h = Array1::zeros(n);
        h[n - 1] = 1.0;
        let Some(d) = solve_square(&m, &h) else { continue };
        let d = d.to_vec();
        if cone.iter().all(|row| dot(row, &d) <= feas_tol) && dot(&lp.c, &d) > 1e-9 {
            return OracleResult { status: LpStatus::Unbounded, objective: f64::INFINITY };
        }
    }
    OracleResult { status: LpStatus::Optimal, objective: best }
}

/// Small LP with one-decimal coefficients; a mix of feasible, infeasible
/// and unbounded instances.
pub fn random_lp(rng: &mut impl Rng) -> DenseLp {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=10);
    let r1 = |rng: &mut dyn rand::RngCore| (rng.gen_range(-10..=10) as f64) / 10.0;
    let a = (0..m).map(|_| (0..n).map(|_| r1(rng)).collect()).collect();
    let b = (0..m)
        .map(|_| if rng.gen_bool(0.2) { -(rng.gen_range(0..=10) as f64) / 10.0 } else { rng.gen_range(0..=30) as f64 / 10.0 })
        .collect();
    let c = (0..n).map(|_| r1(rng)).collect();
    DenseLp { a, b, c }
}
