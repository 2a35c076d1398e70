//! Dense kernels: one-sided Jacobi SVD and the Moore-Penrose pseudoinverse.

use ndarray::{Array1, Array2, ArrayView2, Axis};

/// Thin SVD `a = u * diag(s) * v^T` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Array2<f64>,
    pub s: Array1<f64>,
    pub v: Array2<f64>,
}

impl Svd {
    pub fn reconstruct(&self, singular: &Array1<f64>) -> Array2<f64> {
        let scaled = &self.u * singular;
        scaled.dot(&self.v.t())
    }
}

const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Hestenes one-sided Jacobi. Rotates columns of a working copy until every
/// pair is orthogonal to machine precision, accumulating the right factor.
pub fn svd(a: ArrayView2<f64>) -> Svd {
    let (m, n) = a.dim();
    if m < n {
        let t = svd(a.t());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let mut w = a.to_owned();
    let mut v = Array2::<f64>::eye(n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let wp = w[[i, p]];
                    let wq = w[[i, q]];
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wp = w[[i, p]];
                    let wq = w[[i, q]];
                    w[[i, p]] = c * wp - s * wq;
                    w[[i, q]] = s * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[[i, p]];
                    let vq = v[[i, q]];
                    v[[i, p]] = c * vp - s * vq;
                    v[[i, q]] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w
        .axis_iter(Axis(1))
        .map(|col| col.dot(&col).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u = Array2::<f64>::zeros((m, n));
    let mut s = Array1::<f64>::zeros(n);
    let mut vs = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s[dst] = sigma;
        vs.column_mut(dst).assign(&v.column(src));
        if sigma > 0.0 {
            u.column_mut(dst).assign(&(&w.column(src) / sigma));
        }
    }
    Svd { u, s, v: vs }
}

/// Pseudoinverse with the usual `max(m, n) * eps * s_max` cutoff.
pub fn pinv(a: ArrayView2<f64>) -> Array2<f64> {
    let (m, n) = a.dim();
    let d = svd(a);
    let smax = d.s.iter().cloned().fold(0.0, f64::max);
    let cutoff = (m.max(n) as f64) * f64::EPSILON * smax;
    let inv = d.s.mapv(|x| if x > cutoff { 1.0 / x } else { 0.0 });
    (&d.v * &inv).dot(&d.u.t())
}

/// Solves a square system by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
pub fn solve_square(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut rhs = b.clone();
    let scale = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())).max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))?;
        if m[[pivot, col]].abs() < 1e-11 * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap([col, k], [pivot, k]);
            }
            rhs.swap(col, pivot);
        }
        for r in (col + 1)..n {
            let f = m[[r, col]] / m[[col, col]];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[[r, k]] -= f * m[[col, k]];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = Array1::<f64>::zeros(n);
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for k in (r + 1)..n {
            acc -= m[[r, k]] * x[k];
        }
        x[r] = acc / m[[r, r]];
    }
    Some(x)
}
