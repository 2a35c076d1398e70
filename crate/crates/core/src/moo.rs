//! Recommendation LP built from fitted regressions.
//!
//! Decision variables are `t` (the objective response), `SE` (the
//! constrained response) and the KPI vector `x`. Every regression enters
//! as a two-sided band `|lhs - model(x)| <= k * sigma`, where sigma is that
//! model's residual standard error. `SE >= floor` makes the second response
//! a constraint; sweeping the floor traces the Pareto frontier.

use std::fmt::Write as _;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::Standardization;
use crate::error::{Error, Result};
use crate::plot;
use crate::regress::{fit, FitConfig, LinearModel};
use crate::simplex::{solve_lp, LinearProgram, LpStatus, Row, Variable};

/// Slack below which an LP row counts as binding.
pub const BINDING_TOL: f64 = 1e-7;

/// For each feature, a regression of it on all the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearitySet {
    /// `models[i]` predicts feature i; its own coefficient is exactly 0.
    pub models: Vec<LinearModel>,
}

/// Leave-one-out regressions of every feature on the rest.
pub fn fit_collinearity(x: ArrayView2<f64>, feature_names: &[String], fit_cfg: &FitConfig) -> Result<CollinearitySet> {
    let p = x.ncols();
    if p < 2 {
        return Err(Error::InvalidArgument("collinearity needs at least two features".into()));
    }
    let mut models = Vec::with_capacity(p);
    for i in 0..p {
        let others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
        let design = x.select(Axis(1), &others);
        let m = fit(design.view(), x.column(i), fit_cfg)?;
        let mut coefficients = m.coefficients.clone();
        coefficients.insert(i, 0.0);
        models.push(LinearModel { coefficients, feature_names: feature_names.to_vec(), ..m });
    }
    Ok(CollinearitySet { models })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MooProblem {
    pub objective_model: LinearModel,
    pub constraint_model: LinearModel,
    pub collinearity: Option<CollinearitySet>,
    pub k_slack: f64,
    pub se_floor: f64,
    /// Per-feature `(lower, upper)`; infinite entries leave a side open.
    pub bounds: Vec<(f64, f64)>,
    pub actionable: Vec<bool>,
    pub feature_names: Vec<String>,
}

impl MooProblem {
    pub fn new(objective_model: LinearModel, constraint_model: LinearModel, bounds: Vec<(f64, f64)>) -> Self {
        let p = objective_model.p();
        let feature_names = if objective_model.feature_names.len() == p {
            objective_model.feature_names.clone()
        } else {
            (1..=p).map(|i| format!("x{i}")).collect()
        };
        MooProblem {
            objective_model,
            constraint_model,
            collinearity: None,
            k_slack: 1.0,
            se_floor: 0.0,
            bounds,
            actionable: vec![true; p],
            feature_names,
        }
    }

    pub fn p(&self) -> usize {
        self.objective_model.p()
    }

    /// Pins a non-actionable feature at its reference value.
    pub fn freeze(&mut self, feature: usize, reference: f64) {
        self.actionable[feature] = false;
        self.bounds[feature] = (reference, reference);
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        let mismatch = |got| Error::DimensionMismatch { expected: p, got };
        if self.constraint_model.p() != p {
            return Err(mismatch(self.constraint_model.p()));
        }
        if self.bounds.len() != p {
            return Err(mismatch(self.bounds.len()));
        }
        if self.actionable.len() != p {
            return Err(mismatch(self.actionable.len()));
        }
        if let Some(c) = &self.collinearity {
            if c.models.len() != p {
                return Err(mismatch(c.models.len()));
            }
            for (i, m) in c.models.iter().enumerate() {
                if m.p() != p {
                    return Err(mismatch(m.p()));
                }
                if m.coefficients[i] != 0.0 {
                    return Err(Error::InvalidArgument(format!("collinearity model {i} uses its own feature")));
                }
            }
        }
        if !(self.k_slack >= 0.0) {
            return Err(Error::InvalidArgument("k_slack must be >= 0".into()));
        }
        if let Some((i, _)) = self.bounds.iter().enumerate().find(|(_, (lo, hi))| !(lo <= hi)) {
            return Err(Error::InvalidArgument(format!("bounds of `{}` are inverted", self.feature_names[i])));
        }
        Ok(())
    }
}

fn band_rows(label: &str, lhs: Option<usize>, model: &LinearModel, k: f64, n_vars: usize, x_offset: usize) -> [Row; 2] {
    // lhs - b.x <= k s + b0   and   -lhs + b.x <= k s - b0
    let slack = k * model.residual_std_error;
    let mut upper = vec![0.0; n_vars];
    if let Some(v) = lhs {
        upper[v] += 1.0;
    }
    for (j, b) in model.coefficients.iter().enumerate() {
        upper[x_offset + j] -= b;
    }
    let lower: Vec<f64> = upper.iter().map(|v| -v).collect();
    [
        Row { label: format!("{label}:upper"), coeffs: upper, rhs: slack + model.intercept },
        Row { label: format!("{label}:lower"), coeffs: lower, rhs: slack - model.intercept },
    ]
}

/// Variables `[t, SE, x_1..x_p]`; two rows per regression band plus the
/// SE floor.
pub fn build_lp(prob: &MooProblem) -> Result<LinearProgram> {
    prob.validate()?;
    let p = prob.p();
    let n_vars = p + 2;
    let mut variables = vec![Variable::free("t"), Variable::free("SE")];
    for (name, &(lo, hi)) in prob.feature_names.iter().zip(&prob.bounds) {
        variables.push(Variable::bounded(name.clone(), lo, hi));
    }
    let mut objective = vec![0.0; n_vars];
    objective[0] = 1.0;
    let mut rows = Vec::new();
    rows.extend(band_rows("objective", Some(0), &prob.objective_model, prob.k_slack, n_vars, 2));
    rows.extend(band_rows("constraint", Some(1), &prob.constraint_model, prob.k_slack, n_vars, 2));
    if let Some(set) = &prob.collinearity {
        for (i, m) in set.models.iter().enumerate() {
            let label = format!("collinearity[{}]", prob.feature_names[i]);
            rows.extend(band_rows(&label, Some(2 + i), m, prob.k_slack, n_vars, 2));
        }
    }
    let mut floor = vec![0.0; n_vars];
    floor[1] = -1.0;
    rows.push(Row { label: "se_floor".into(), coeffs: floor, rhs: -prob.se_floor });
    Ok(LinearProgram { variables, objective, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub status: LpStatus,
    pub x_star: Vec<f64>,
    pub x_star_raw: Option<Vec<f64>>,
    #[serde(rename = "predicted_P")]
    pub predicted_p: f64,
    #[serde(rename = "predicted_SE")]
    pub predicted_se: f64,
    pub binding: Vec<String>,
    pub se_floor: f64,
    pub k_slack: f64,
}

impl Recommendation {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Solves the LP for one SE floor. When `standardization` is given the KPI
/// vector is also reported in raw units.
pub fn recommend(prob: &MooProblem, standardization: Option<&Standardization>) -> Result<Recommendation> {
    let lp = build_lp(prob)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Ok(Recommendation {
            status: sol.status,
            x_star: Vec::new(),
            x_star_raw: None,
            predicted_p: f64::NAN,
            predicted_se: f64::NAN,
            binding: Vec::new(),
            se_floor: prob.se_floor,
            k_slack: prob.k_slack,
        });
    }
    let binding = lp
        .rows
        .iter()
        .zip(lp.slacks(&sol.values))
        .filter(|(_, s)| *s < BINDING_TOL)
        .map(|(r, _)| r.label.clone())
        .collect();
    let x_star = sol.values[2..].to_vec();
    let x_star_raw = standardization
        .map(|rec| rec.destandardize_named(&prob.feature_names, &x_star))
        .transpose()?;
    Ok(Recommendation {
        status: LpStatus::Optimal,
        x_star,
        x_star_raw,
        predicted_p: sol.values[0],
        predicted_se: sol.values[1],
        binding,
        se_floor: prob.se_floor,
        k_slack: prob.k_slack,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub feature_names: Vec<String>,
    pub points: Vec<Recommendation>,
}

/// One solve per SE floor, in grid order.
pub fn pareto_sweep(prob: &MooProblem, se_grid: &[f64]) -> Result<Frontier> {
    if se_grid.is_empty() {
        return Err(Error::InvalidArgument("empty SE grid".into()));
    }
    if se_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("SE grid must be strictly ascending".into()));
    }
    let points = se_grid
        .iter()
        .map(|&floor| recommend(&MooProblem { se_floor: floor, ..prob.clone() }, None))
        .collect::<Result<Vec<_>>>()?;
    Ok(Frontier { feature_names: prob.feature_names.clone(), points })
}

impl Frontier {
    /// `se_floor,status,achieved_se,p_star,x_1..x_p`; non-optimal rows
    /// leave the numeric fields empty.
    pub fn to_csv(&self) -> String {
        let p = self.feature_names.len();
        let mut out = String::from("se_floor,status,achieved_se,p_star");
        for i in 1..=p {
            let _ = write!(out, ",x_{i}");
        }
        out.push('\n');
        for r in &self.points {
            let _ = write!(out, "{},{}", r.se_floor, r.status);
            if r.status == LpStatus::Optimal {
                let _ = write!(out, ",{},{}", r.predicted_se, r.predicted_p);
                for v in &r.x_star {
                    let _ = write!(out, ",{v}");
                }
            } else {
                out.push_str(&",".repeat(p + 2));
            }
            out.push('\n');
        }
        out
    }

    pub fn optimal(&self) -> impl Iterator<Item = &Recommendation> {
        self.points.iter().filter(|r| r.status == LpStatus::Optimal)
    }

    /// Scatter of (achieved SE, P*) over the optimal points.
    pub fn to_svg(&self) -> String {
        let series = plot::Series {
            label: "Pareto points".into(),
            points: self.optimal().map(|r| (r.predicted_se, r.predicted_p)).collect(),
        };
        plot::line_chart("Pareto frontier", "SE", "P*", &[series], false)
    }
}
