//! Gamma-function differences for the NB2 likelihood, exact for integer counts.

use statrs::function::gamma::{digamma, ln_gamma};

/// Counts up to this size use finite sums.
const SUM_LIMIT: f64 = 1e4;

fn small_count(y: f64) -> bool {
    y <= SUM_LIMIT && y.fract() == 0.0
}

/// lnΓ(y + r) − lnΓ(r).
pub(crate) fn ln_gamma_diff(y: f64, r: f64) -> f64 {
    if small_count(y) {
        (0..y as u64).map(|k| (r + k as f64).ln()).sum()
    } else {
        ln_gamma(y + r) - ln_gamma(r)
    }
}

/// ψ(y + r) − ψ(r).
pub(crate) fn digamma_diff(y: f64, r: f64) -> f64 {
    if small_count(y) {
        (0..y as u64).map(|k| 1.0 / (r + k as f64)).sum()
    } else {
        digamma(y + r) - digamma(r)
    }
}

/// ψ′(r) − ψ′(y + r).
pub(crate) fn trigamma_diff(y: f64, r: f64) -> f64 {
    if small_count(y) {
        (0..y as u64).map(|k| (r + k as f64).powi(-2)).sum()
    } else {
        trigamma(r) - trigamma(y + r)
    }
}

pub(crate) fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x + x2 / 2.0 + (1.0 / x) * x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trigamma_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((trigamma(1.0) - pi2_6).abs() < 1e-12);
        assert!((trigamma(0.5) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-11);
        assert!((trigamma(100.0) - 0.010050166663333571).abs() < 1e-15);
    }

    #[test]
    fn sums_match_special_functions() {
        for &(y, r) in &[(0.0, 2.5), (3.0, 0.7), (40.0, 12.0), (250.0, 0.01)] {
            assert!((ln_gamma_diff(y, r) - (ln_gamma(y + r) - ln_gamma(r))).abs() < 1e-8 * (1.0 + ln_gamma(y + r).abs()));
            assert!((digamma_diff(y, r) - (digamma(y + r) - digamma(r))).abs() < 1e-9);
            assert!((trigamma_diff(y, r) - (trigamma(r) - trigamma(y + r))).abs() < 1e-9);
        }
    }
}
