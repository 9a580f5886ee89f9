//! Logistic and negative binomial regression fitted by Newton's method,
//! with Wald inference and effect-size transforms.

mod design;
mod effects;
mod linalg;
mod logistic;
mod negbin;
mod special;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use design::{build_citation_design, build_liveness_design, CITATION_COLUMNS, LIVENESS_COLUMNS};
pub use effects::{
    doubling_odds_percent, format_doubling_odds, format_rate_ratio, rate_ratio_percent, stars, wald_p_value,
};
pub use linalg::check_rank;
pub use logistic::{fit_logistic, logistic_gradient, logistic_loglik};
pub use negbin::{fit_negbin, fit_poisson, negbin_gradient, negbin_loglik, ALPHA_FLOOR};

/// Regressors and response. Column 0 is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDesign);
        }
        if rows.len() != y.len() || rows.iter().any(|r| r.len() != names.len()) {
            return Err(Error::Invalid("design rows, names and response disagree in size".into()));
        }
        if rows.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("design contains a non-finite value".into()));
        }
        let x = DMatrix::from_fn(rows.len(), names.len(), |i, j| rows[i][j]);
        Ok(DesignMatrix {
            names,
            x,
            y: DVector::from_vec(y),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.x.column(j).iter().copied().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    pub log_likelihood: f64,
    /// NB2 dispersion; `None` for logistic fits.
    pub alpha: Option<f64>,
    pub alpha_se: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub diagnostic: Option<String>,
}

impl RegressionFit {
    pub fn coef(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|j| self.beta[j])
    }

    /// Rows `name, beta, se, z, p, stars`, then `alpha` (NB2 only) and `log_likelihood`.
    pub fn report_rows(&self) -> Vec<[String; 6]> {
        let num = |v: f64| format!("{v:.6}");
        let mut rows: Vec<[String; 6]> = (0..self.beta.len())
            .map(|j| {
                [
                    self.names[j].clone(),
                    num(self.beta[j]),
                    num(self.se[j]),
                    num(self.z[j]),
                    format!("{:.6e}", self.p[j]),
                    stars(self.p[j]).to_string(),
                ]
            })
            .collect();
        if let Some(a) = self.alpha {
            let se = self.alpha_se.map(num).unwrap_or_default();
            rows.push(["alpha".into(), num(a), se, String::new(), String::new(), String::new()]);
        }
        rows.push([
            "log_likelihood".into(),
            num(self.log_likelihood),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ]);
        rows
    }
}

/// Fills z, p from beta and se.
fn wald(beta: &DVector<f64>, se: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
    let z: Vec<f64> = beta.iter().zip(se.iter()).map(|(b, s)| b / s).collect();
    let p = z.iter().map(|z| wald_p_value(*z)).collect();
    (z, p)
}
