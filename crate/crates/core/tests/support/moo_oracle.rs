//! Random three-feature recommendation problems on the unit box, with a
//! collinearity tie `x2 ~ 0.5 x1`, and a brute-force grid maximizer.

use fmrbench_core::moo::{CollinearitySet, MooProblem};
use fmrbench_core::regress::LinearModel;
use rand::Rng;

fn model(intercept: f64, coefficients: Vec<f64>, sigma: f64) -> LinearModel {
    LinearModel::new(intercept, coefficients, sigma)
}

fn eval(m: &LinearModel, x: &[f64]) -> f64 {
    m.intercept + m.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

pub fn random_instance(rng: &mut impl Rng) -> MooProblem {
    let coefs = |rng: &mut dyn rand::RngCore| (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect::<Vec<f64>>();
    let objective = model(rng.gen_range(-1.0..1.0), coefs(rng), rng.gen_range(0.0..0.2));
    let constraint = model(rng.gen_range(-1.0..1.0), coefs(rng), rng.gen_range(0.0..0.2));
    let tie = rng.gen_range(0.03..0.1);
    let collinearity = CollinearitySet {
        models: vec![
            // x1 unconstrained in practice; x3 likewise.
            model(0.5, vec![0.0, 0.0, 0.0], 1.0),
            model(0.0, vec![0.5, 0.0, 0.0], tie),
            model(0.5, vec![0.0, 0.0, 0.0], 1.0),
        ],
    };
    let mut prob = MooProblem::new(objective, constraint, vec![(0.0, 1.0); 3]);
    prob.collinearity = Some(collinearity);
    prob.k_slack = rng.gen_range(0.5..2.0);
    prob
}

/// Largest achievable `t` over the box grid, or None when no grid point is
/// feasible.
pub fn grid_optimum(prob: &MooProblem, step: f64) -> Option<f64> {
    let k = prob.k_slack;
    let axis: Vec<Vec<f64>> = prob
        .bounds
        .iter()
        .map(|&(lo, hi)| {
            let n = ((hi - lo) / step).round() as usize;
            (0..=n).map(|i| lo + i as f64 * step).collect()
        })
        .collect();
    let ties = prob.collinearity.as_ref().map(|c| c.models.as_slice()).unwrap_or(&[]);
    let mut best: Option<f64> = None;
    let mut x = vec![0.0; 3];
    for &a in &axis[0] {
        x[0] = a;
        for &b in &axis[1] {
            x[1] = b;
            for &c in &axis[2] {
                x[2] = c;
                let se_max = eval(&prob.constraint_model, &x) + k * prob.constraint_model.residual_std_error;
                if se_max < prob.se_floor {
                    continue;
                }
                if ties
                    .iter()
                    .enumerate()
                    .any(|(i, m)| (x[i] - eval(m, &x)).abs() > k * m.residual_std_error)
                {
                    continue;
                }
                let t = eval(&prob.objective_model, &x) + k * prob.objective_model.residual_std_error;
                best = Some(best.map_or(t, |v: f64| v.max(t)));
            }
        }
    }
    best
}

/// Largest violation of any band, bound or the floor at a solution.
pub fn max_violation(prob: &MooProblem, t: f64, se: f64, x: &[f64]) -> f64 {
    let k = prob.k_slack;
    let mut worst = 0.0_f64;
    let mut band = |lhs: f64, m: &LinearModel| {
        worst = worst.max((lhs - eval(m, x)).abs() - k * m.residual_std_error);
    };
    band(t, &prob.objective_model);
    band(se, &prob.constraint_model);
    if let Some(c) = &prob.collinearity {
        for (i, m) in c.models.iter().enumerate() {
            band(x[i], m);
        }
    }
    for (v, &(lo, hi)) in x.iter().zip(&prob.bounds) {
        worst = worst.max(lo - v).max(v - hi);
    }
    worst.max(prob.se_floor - se)
}

/// A floor reachable somewhere in the box, picked from a random point.
pub fn reachable_floor(prob: &MooProblem, rng: &mut impl Rng) -> f64 {
    let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
    eval(&prob.constraint_model, &x)
}
