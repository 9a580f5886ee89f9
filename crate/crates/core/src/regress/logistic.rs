use nalgebra::{DMatrix, DVector};

use super::linalg::{check_rank, spd_inverse, spd_solve};
use super::{wald, DesignMatrix, RegressionFit};
use crate::error::{Error, Result};

const MAX_ITER: usize = 100;
const STEP_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 40;
/// Coefficients beyond this size signal separation.
const DIVERGENCE: f64 = 50.0;

fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Bernoulli log-likelihood Σ yη − ln(1 + eᶯ).
pub fn logistic_loglik(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y.iter()).map(|(e, y)| y * e - softplus(*e)).sum()
}

/// Score vector Xᵀ(y − p).
pub fn logistic_gradient(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> DVector<f64> {
    let p = (x * beta).map(sigmoid);
    x.transpose() * (y - p)
}

fn information(x: &DMatrix<f64>, beta: &DVector<f64>) -> DMatrix<f64> {
    let p = (x * beta).map(sigmoid);
    let mut xw = x.clone();
    for (i, mut row) in xw.row_iter_mut().enumerate() {
        row *= p[i] * (1.0 - p[i]);
    }
    x.transpose() * xw
}

/// Maximum-likelihood logistic regression by Newton ascent with step-halving.
pub fn fit_logistic(design: &DesignMatrix) -> Result<RegressionFit> {
    let (x, y) = (&design.x, &design.y);
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(Error::Invalid("logistic response must be 0 or 1".into()));
    }
    if x.nrows() <= x.ncols() {
        return Err(Error::Invalid(format!(
            "{} rows are too few for {} coefficients",
            x.nrows(),
            x.ncols()
        )));
    }
    check_rank(x, &design.names)?;

    let mut beta = DVector::zeros(x.ncols());
    let mut ll = logistic_loglik(x, y, &beta);
    let mut converged = false;
    let mut diagnostic = None;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let grad = logistic_gradient(x, y, &beta);
        let Some(step) = spd_solve(&information(x, &beta), &grad) else {
            diagnostic = Some("information matrix lost positive definiteness".to_string());
            break;
        };
        let mut t = 1.0;
        let mut next = &beta + &step;
        let mut next_ll = logistic_loglik(x, y, &next);
        let mut halvings = 0;
        while next_ll.partial_cmp(&ll).is_none_or(|o| o.is_lt()) && halvings < MAX_HALVINGS {
            t *= 0.5;
            next = &beta + &step * t;
            next_ll = logistic_loglik(x, y, &next);
            halvings += 1;
        }
        if next_ll.partial_cmp(&ll).is_none_or(|o| o.is_lt()) {
            diagnostic = Some("step-halving failed to increase the log-likelihood".to_string());
            break;
        }
        let delta = (&step * t).amax();
        beta = next;
        ll = next_ll;
        if delta < STEP_TOL {
            converged = true;
            break;
        }
        if let Some(why) = separation(x, y, &beta) {
            diagnostic = Some(why);
            break;
        }
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!("no convergence after {MAX_ITER} iterations"));
    }

    let se = spd_inverse(&information(x, &beta))
        .map(|inv| inv.diagonal().map(f64::sqrt))
        .unwrap_or_else(|| DVector::from_element(beta.len(), f64::NAN));
    let (z, p) = wald(&beta, &se);
    Ok(RegressionFit {
        names: design.names.clone(),
        beta: beta.iter().copied().collect(),
        se: se.iter().copied().collect(),
        z,
        p,
        log_likelihood: ll,
        alpha: None,
        alpha_se: None,
        converged,
        iterations,
        diagnostic,
    })
}

fn separation(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> Option<String> {
    if beta.amax() > DIVERGENCE {
        return Some(format!("coefficients diverge (|beta| > {DIVERGENCE}): perfect separation"));
    }
    let p = (x * beta).map(sigmoid);
    if p.iter().zip(y.iter()).all(|(p, y)| (p - y).abs() < 1e-8) {
        return Some("fitted probabilities reproduce the response exactly: perfect separation".to_string());
    }
    None
}
