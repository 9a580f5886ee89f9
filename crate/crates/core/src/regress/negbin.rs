use nalgebra::{DMatrix, DVector};

use super::linalg::{check_rank, spd_inverse, spd_solve};
use super::special::{digamma_diff, ln_gamma_diff, trigamma_diff};
use super::{wald, DesignMatrix, RegressionFit};
use crate::error::{Error, Result};

pub const ALPHA_FLOOR: f64 = 1e-8;
const MAX_ITER: usize = 200;
const LL_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 40;
const MAX_LOG_ALPHA_STEP: f64 = 3.0;

fn mu(x: &DMatrix<f64>, beta: &DVector<f64>) -> DVector<f64> {
    (x * beta).map(|e| e.min(700.0).exp())
}

/// NB2 log-likelihood with variance μ + αμ².
pub fn negbin_loglik(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, alpha: f64) -> f64 {
    let r = 1.0 / alpha;
    let m = mu(x, beta);
    m.iter()
        .zip(y.iter())
        .map(|(&m, &y)| {
            let am = alpha * m;
            ln_gamma_diff(y, r) - ln_gamma_plus_one(y) - r * am.ln_1p() + y * (am.ln() - am.ln_1p())
        })
        .sum()
}

fn ln_gamma_plus_one(y: f64) -> f64 {
    statrs::function::gamma::ln_gamma(y + 1.0)
}

/// Gradient with respect to β and α.
pub fn negbin_gradient(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, alpha: f64) -> (DVector<f64>, f64) {
    let r = 1.0 / alpha;
    let m = mu(x, beta);
    let w = DVector::from_fn(m.len(), |i, _| (y[i] - m[i]) / (1.0 + alpha * m[i]));
    let g_alpha = m
        .iter()
        .zip(y.iter())
        .map(|(&m, &y)| {
            let d = 1.0 + alpha * m;
            r * r * (d.ln() - digamma_diff(y, r)) + r * (y - m) / d
        })
        .sum();
    (x.transpose() * w, g_alpha)
}

fn d2_alpha(m: &DVector<f64>, y: &DVector<f64>, alpha: f64) -> f64 {
    let r = 1.0 / alpha;
    m.iter()
        .zip(y.iter())
        .map(|(&m, &y)| {
            let d = 1.0 + alpha * m;
            -2.0 * r.powi(3) * (d.ln() - digamma_diff(y, r)) - r.powi(4) * trigamma_diff(y, r) + r * r * m / d
                - r * r * (y - m) / d
                - r * m * (y - m) / (d * d)
        })
        .sum()
}

/// Observed information for β: Σ xxᵀ μ(1 + αy)/(1 + αμ)².
fn info_beta(x: &DMatrix<f64>, m: &DVector<f64>, y: &DVector<f64>, alpha: f64) -> DMatrix<f64> {
    let mut xw = x.clone();
    for (i, mut row) in xw.row_iter_mut().enumerate() {
        let d = 1.0 + alpha * m[i];
        row *= m[i] * (1.0 + alpha * y[i]) / (d * d);
    }
    x.transpose() * xw
}

/// Minus the cross derivative ∂²ℓ/∂β∂α.
fn info_cross(x: &DMatrix<f64>, m: &DVector<f64>, y: &DVector<f64>, alpha: f64) -> DVector<f64> {
    let w = DVector::from_fn(m.len(), |i, _| {
        let d = 1.0 + alpha * m[i];
        (y[i] - m[i]) * m[i] / (d * d)
    });
    x.transpose() * w
}

fn check_counts(design: &DesignMatrix, extra: usize) -> Result<()> {
    let y = &design.y;
    if y.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
        return Err(Error::Invalid("count response must hold non-negative integers".into()));
    }
    if y.iter().all(|v| *v == 0.0) {
        return Err(Error::Invalid("all-zero count response".into()));
    }
    if design.n_rows() <= design.n_cols() + extra {
        return Err(Error::Invalid(format!(
            "{} rows are too few for {} parameters",
            design.n_rows(),
            design.n_cols() + extra
        )));
    }
    check_rank(&design.x, &design.names)
}

fn poisson_loglik(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &y)| y * e - e.min(700.0).exp() - ln_gamma_plus_one(y))
        .sum()
}

fn start(design: &DesignMatrix) -> DVector<f64> {
    let mut beta = DVector::zeros(design.n_cols());
    if design.x.column(0).iter().all(|v| *v == 1.0) {
        beta[0] = design.y.mean().ln();
    }
    beta
}

/// One Newton step with step-halving; returns the accepted point and its log-likelihood.
fn newton_step(
    beta: &DVector<f64>,
    ll: f64,
    step: &DVector<f64>,
    eval: impl Fn(&DVector<f64>) -> f64,
) -> Option<(DVector<f64>, f64, f64)> {
    let mut t = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let next = beta + step * t;
        let next_ll = eval(&next);
        if next_ll >= ll {
            return Some((next, next_ll, (step * t).amax()));
        }
        t *= 0.5;
    }
    None
}

struct PoissonFit {
    beta: DVector<f64>,
    ll: f64,
    converged: bool,
    iterations: usize,
}

fn poisson_newton(design: &DesignMatrix) -> PoissonFit {
    let (x, y) = (&design.x, &design.y);
    let mut beta = start(design);
    let mut ll = poisson_loglik(x, y, &beta);
    for it in 1..=MAX_ITER {
        let m = mu(x, &beta);
        let grad = x.transpose() * (y - &m);
        let info = info_beta(x, &m, y, 0.0);
        let Some(step) = spd_solve(&info, &grad) else {
            return PoissonFit { beta, ll, converged: false, iterations: it };
        };
        let Some((next, next_ll, delta)) = newton_step(&beta, ll, &step, |b| poisson_loglik(x, y, b)) else {
            return PoissonFit { beta, ll, converged: false, iterations: it };
        };
        beta = next;
        ll = next_ll;
        if delta < 1e-10 {
            return PoissonFit { beta, ll, converged: true, iterations: it };
        }
    }
    PoissonFit { beta, ll, converged: false, iterations: MAX_ITER }
}

/// Poisson regression by Newton's method.
pub fn fit_poisson(design: &DesignMatrix) -> Result<RegressionFit> {
    check_counts(design, 0)?;
    let fit = poisson_newton(design);
    let m = mu(&design.x, &fit.beta);
    let se = spd_inverse(&info_beta(&design.x, &m, &design.y, 0.0))
        .map(|inv| inv.diagonal().map(f64::sqrt))
        .unwrap_or_else(|| DVector::from_element(fit.beta.len(), f64::NAN));
    let (z, p) = wald(&fit.beta, &se);
    Ok(RegressionFit {
        names: design.names.clone(),
        beta: fit.beta.iter().copied().collect(),
        se: se.iter().copied().collect(),
        z,
        p,
        log_likelihood: fit.ll,
        alpha: None,
        alpha_se: None,
        converged: fit.converged,
        iterations: fit.iterations,
        diagnostic: (!fit.converged).then(|| "Poisson fit did not converge".to_string()),
    })
}

/// NB2 regression: alternating Newton steps on β and on ln α.
pub fn fit_negbin(design: &DesignMatrix) -> Result<RegressionFit> {
    check_counts(design, 1)?;
    let (x, y) = (&design.x, &design.y);
    let pois = poisson_newton(design);
    let mut beta = pois.beta;
    let m = mu(x, &beta);
    let moments: f64 = m.iter().zip(y.iter()).map(|(m, y)| (y - m).powi(2) - m).sum::<f64>()
        / m.iter().map(|m| m * m).sum::<f64>();
    let mut alpha = if moments.is_finite() { moments.max(ALPHA_FLOOR) } else { 1.0 };
    let mut ll = negbin_loglik(x, y, &beta, alpha);
    let mut converged = false;
    let mut diagnostic = None;
    let mut iterations = 0;

    while iterations < MAX_ITER {
        iterations += 1;
        let before = ll;

        let m = mu(x, &beta);
        let (grad, _) = negbin_gradient(x, y, &beta, alpha);
        match spd_solve(&info_beta(x, &m, y, alpha), &grad)
            .and_then(|step| newton_step(&beta, ll, &step, |b| negbin_loglik(x, y, b, alpha)))
        {
            Some((next, next_ll, _)) => {
                beta = next;
                ll = next_ll;
            }
            None => {
                diagnostic = Some("beta step failed to increase the log-likelihood".to_string());
                break;
            }
        }

        let m = mu(x, &beta);
        let (_, g_alpha) = negbin_gradient(x, y, &beta, alpha);
        let g = alpha * g_alpha;
        let h = alpha * alpha * d2_alpha(&m, y, alpha) + g;
        let raw = if h < 0.0 { -g / h } else { g.signum() };
        let mut step = raw.clamp(-MAX_LOG_ALPHA_STEP, MAX_LOG_ALPHA_STEP);
        if !(alpha <= ALPHA_FLOOR && step < 0.0) && step.is_finite() {
            for _ in 0..=MAX_HALVINGS {
                let cand = (alpha.ln() + step).exp().max(ALPHA_FLOOR);
                let cand_ll = negbin_loglik(x, y, &beta, cand);
                if cand_ll >= ll {
                    alpha = cand;
                    ll = cand_ll;
                    break;
                }
                step *= 0.5;
            }
        }

        if ll - before < LL_TOL {
            converged = true;
            break;
        }
    }
    if !converged && diagnostic.is_none() {
        diagnostic = Some(format!("no convergence after {MAX_ITER} iterations"));
    }
    let poisson_limit = alpha <= ALPHA_FLOOR * (1.0 + 1e-9);
    if poisson_limit {
        diagnostic = Some(match diagnostic {
            Some(d) => format!("Poisson-limit: dispersion at floor {ALPHA_FLOOR}; {d}"),
            None => format!("Poisson-limit: dispersion at floor {ALPHA_FLOOR}"),
        });
    }

    let m = mu(x, &beta);
    let ib = info_beta(x, &m, y, alpha);
    let p = beta.len();
    let joint = (!poisson_limit)
        .then(|| {
            let mut j = DMatrix::zeros(p + 1, p + 1);
            j.view_mut((0, 0), (p, p)).copy_from(&ib);
            let c = info_cross(x, &m, y, alpha);
            j.view_mut((0, p), (p, 1)).copy_from(&c);
            j.view_mut((p, 0), (1, p)).copy_from(&c.transpose());
            j[(p, p)] = -d2_alpha(&m, y, alpha);
            spd_inverse(&j)
        })
        .flatten();
    let (se, alpha_se) = match joint {
        Some(inv) => {
            let d = inv.diagonal().map(f64::sqrt);
            (d.rows(0, p).into_owned(), Some(d[p]))
        }
        None => (
            spd_inverse(&ib)
                .map(|inv| inv.diagonal().map(f64::sqrt))
                .unwrap_or_else(|| DVector::from_element(p, f64::NAN)),
            None,
        ),
    };
    let (z, pv) = wald(&beta, &se);
    Ok(RegressionFit {
        names: design.names.clone(),
        beta: beta.iter().copied().collect(),
        se: se.iter().copied().collect(),
        z,
        p: pv,
        log_likelihood: ll,
        alpha: Some(alpha),
        alpha_se,
        converged,
        iterations,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma, Poisson};

    use super::*;

    fn nb2(n: usize, beta: &[f64], alpha: Option<f64>, seed: u64) -> DesignMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names = (0..beta.len()).map(|j| format!("x{j}")).collect();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let mut row = vec![1.0];
            row.extend((1..beta.len()).map(|_| rng.random_range(-1.0..1.0)));
            let m: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>().exp();
            let lambda = match alpha {
                Some(a) => Gamma::new(1.0 / a, m * a).unwrap().sample(&mut rng),
                None => m,
            };
            y.push(Poisson::new(lambda).unwrap().sample(&mut rng));
            rows.push(row);
        }
        DesignMatrix::new(names, &rows, y).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = nb2(400, &[1.0, 0.5, -0.3], Some(0.7), 2);
        let beta = DVector::from_vec(vec![0.8, 0.2, -0.1]);
        let alpha = 0.9;
        let (g, ga) = negbin_gradient(&d.x, &d.y, &beta, alpha);
        let ll = |b: &DVector<f64>, a: f64| negbin_loglik(&d.x, &d.y, b, a);
        let h = 1e-5;
        for j in 0..3 {
            let mut up = beta.clone();
            up[j] += h;
            let mut down = beta.clone();
            down[j] -= h;
            let fd = (ll(&up, alpha) - ll(&down, alpha)) / (2.0 * h);
            assert!(((fd - g[j]) / g[j]).abs() < 1e-6, "{j}");
        }
        let fd = (ll(&beta, alpha + h) - ll(&beta, alpha - h)) / (2.0 * h);
        assert!(((fd - ga) / ga).abs() < 1e-6);

        let m = mu(&d.x, &beta);
        let d2 = d2_alpha(&m, &d.y, alpha);
        let ga_at = |a: f64| negbin_gradient(&d.x, &d.y, &beta, a).1;
        let fd2 = (ga_at(alpha + h) - ga_at(alpha - h)) / (2.0 * h);
        assert!(((fd2 - d2) / d2).abs() < 1e-6);
        let cross = info_cross(&d.x, &m, &d.y, alpha);
        for j in 0..3 {
            let mut up = beta.clone();
            up[j] += h;
            let mut down = beta.clone();
            down[j] -= h;
            let fd = (negbin_gradient(&d.x, &d.y, &up, alpha).1 - negbin_gradient(&d.x, &d.y, &down, alpha).1) / (2.0 * h);
            assert!(((fd + cross[j]) / cross[j]).abs() < 1e-6, "cross {j}");
        }
    }

    #[test]
    fn recovers_known_parameters() {
        let truth = [1.0, 0.5, -0.4];
        let alpha = 0.6;
        let d = nb2(5000, &truth, Some(alpha), 21);
        let fit = fit_negbin(&d).unwrap();
        assert!(fit.converged, "{:?}", fit.diagnostic);
        for (j, t) in truth.iter().enumerate() {
            assert!((fit.beta[j] - t).abs() < 3.0 * fit.se[j], "{j}");
        }
        assert!((fit.alpha.unwrap() - alpha).abs() < 3.0 * fit.alpha_se.unwrap());
        let beta = DVector::from_vec(fit.beta.clone());
        let (g, ga) = negbin_gradient(&d.x, &d.y, &beta, fit.alpha.unwrap());
        assert!(g.amax() < 1e-6 * 5000.0);
        assert!(ga.abs() < 1e-6 * 5000.0);
    }

    #[test]
    fn poisson_limit_matches_poisson_fit() {
        let d = nb2(3000, &[0.7, 0.3, -0.2], None, 8);
        let nb = fit_negbin(&d).unwrap();
        let pois = fit_poisson(&d).unwrap();
        for j in 0..3 {
            assert!((nb.beta[j] - pois.beta[j]).abs() < 1e-3);
        }
        assert!(nb.alpha.unwrap() < 1e-2);
    }

    #[test]
    fn all_zero_rejected() {
        let mut d = nb2(50, &[0.0, 0.1], Some(1.0), 1);
        d.y.fill(0.0);
        assert!(fit_negbin(&d).is_err());
    }
}
