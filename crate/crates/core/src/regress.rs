//! Component regression models (OLS and LASSO) and the AIC used to score
//! a model against a block of observations.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Floor on RSS/n inside the log so exact fits stay finite.
pub const RSS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ols,
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub model_kind: ModelKind,
    pub lambda: f64,
    pub cd_tol: f64,
    pub cd_max_iter: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self::ols()
    }
}

impl FitConfig {
    pub fn ols() -> Self {
        FitConfig { model_kind: ModelKind::Ols, lambda: 0.0, cd_tol: 1e-10, cd_max_iter: 100_000 }
    }

    pub fn lasso(lambda: f64) -> Self {
        FitConfig { model_kind: ModelKind::Lasso, lambda, ..Self::ols() }
    }

    /// OLS for `lambda == 0`, LASSO otherwise.
    pub fn for_lambda(lambda: f64) -> Self {
        if lambda > 0.0 { Self::lasso(lambda) } else { Self::ols() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda {} must be >= 0", self.lambda)));
        }
        if self.model_kind == ModelKind::Ols && self.lambda != 0.0 {
            return Err(Error::InvalidArgument("OLS requires lambda = 0".into()));
        }
        Ok(())
    }
}

/// A fitted linear model `y = intercept + x . coefficients`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    #[serde(default)]
    pub feature_names: Vec<String>,
    pub lambda: f64,
    pub residual_std_error: f64,
    pub effective_params: usize,
    #[serde(skip, default = "converged_default")]
    pub converged: bool,
}

fn converged_default() -> bool {
    true
}

impl LinearModel {
    /// Builds a model from known coefficients; `effective_params` is derived
    /// from the active set.
    pub fn new(intercept: f64, coefficients: Vec<f64>, residual_std_error: f64) -> Self {
        let effective_params = 1 + coefficients.iter().filter(|b| **b != 0.0).count();
        LinearModel {
            intercept,
            coefficients,
            feature_names: Vec::new(),
            lambda: 0.0,
            residual_std_error,
            effective_params,
            converged: true,
        }
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        self.feature_names = names;
        self
    }

    pub fn p(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), got: x.ncols() });
        }
        let beta = ArrayView1::from(&self.coefficients);
        Ok(x.dot(&beta) + self.intercept)
    }

    pub fn rss(&self, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<f64> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), got: y.len() });
        }
        let yhat = self.predict(x)?;
        Ok(yhat.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    /// `n ln(max(RSS, n * floor) / n) + 2 p_eff` on the given evaluation rows.
    pub fn aic(&self, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<f64> {
        if y.is_empty() {
            return Err(Error::InvalidArgument("AIC needs at least one evaluation row".into()));
        }
        let rss = self.rss(x, y)?;
        Ok(aic_from_rss(y.len(), rss, self.effective_params))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn aic_from_rss(n: usize, rss: f64, effective_params: usize) -> f64 {
    let n = n as f64;
    n * (rss.max(n * RSS_FLOOR) / n).ln() + 2.0 * effective_params as f64
}

pub fn predict(m: &LinearModel, x: ArrayView2<f64>) -> Result<Array1<f64>> {
    m.predict(x)
}

pub fn rss(m: &LinearModel, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<f64> {
    m.rss(x, y)
}

pub fn aic_linear(m: &LinearModel, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<f64> {
    m.aic(x, y)
}

/// `0.5/n ||y - b0 - X b||^2 + lambda ||b||_1`
pub fn lasso_objective(m: &LinearModel, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<f64> {
    let rss = m.rss(x, y)?;
    let l1: f64 = m.coefficients.iter().map(|b| b.abs()).sum();
    Ok(0.5 * rss / y.len() as f64 + m.lambda * l1)
}

fn center(x: ArrayView2<f64>, y: ArrayView1<f64>) -> (Array2<f64>, Array1<f64>, Array1<f64>, f64) {
    let x_mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let y_mean = y.mean().expect("n >= 2");
    (&x - &x_mean, &y - y_mean, x_mean, y_mean)
}

fn soft_threshold(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

/// Cyclic coordinate descent on centered data. `on_sweep` sees the
/// coefficients after every full pass. Returns (beta, converged).
pub(crate) fn coordinate_descent(
    xc: &Array2<f64>,
    yc: &Array1<f64>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    mut on_sweep: impl FnMut(&[f64]),
) -> (Vec<f64>, bool) {
    let (n, p) = xc.dim();
    let nf = n as f64;
    let col_sq: Vec<f64> = xc.axis_iter(Axis(1)).map(|c| c.dot(&c) / nf).collect();
    let mut beta = vec![0.0; p];
    let mut resid = yc.clone();
    for _ in 0..max_iter {
        let mut max_change = 0.0_f64;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = xc.column(j);
            let old = beta[j];
            let rho = col.dot(&resid) / nf + col_sq[j] * old;
            let new = soft_threshold(rho, lambda) / col_sq[j];
            let delta = new - old;
            if delta != 0.0 {
                resid.scaled_add(-delta, &col);
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        on_sweep(&beta);
        if max_change < tol {
            return (beta, true);
        }
    }
    (beta, false)
}

/// Fits OLS (minimum-norm under rank deficiency) or LASSO with an
/// unpenalized intercept.
pub fn fit(x: ArrayView2<f64>, y: ArrayView1<f64>, cfg: &FitConfig) -> Result<LinearModel> {
    cfg.validate()?;
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("fit needs n >= 2 rows, got {n}")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in fit input".into()));
    }
    let (xc, yc, x_mean, y_mean) = center(x, y);
    let (beta, converged) = match cfg.model_kind {
        ModelKind::Ols => (linalg::pinv(xc.view()).dot(&yc).to_vec(), true),
        ModelKind::Lasso => coordinate_descent(&xc, &yc, cfg.lambda, cfg.cd_tol, cfg.cd_max_iter, |_| {}),
    };
    let intercept = y_mean - x_mean.dot(&Array1::from(beta.clone()));
    let mut model = LinearModel::new(intercept, beta, 0.0);
    model.lambda = cfg.lambda;
    model.converged = converged;
    let rss = model.rss(x, y)?;
    let dof = n.saturating_sub(model.effective_params).max(1);
    model.residual_std_error = (rss / dof as f64).sqrt();
    Ok(model)
}

/// Coefficient of determination of `m` on (x, y).
pub fn r_squared(m: &LinearModel, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<f64> {
    let rss = m.rss(x, y)?;
    let mean = y.mean().unwrap_or(0.0);
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(1.0 - rss / tss)
}
