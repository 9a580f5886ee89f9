use statrs::function::erf::erfc;

/// Two-sided p-value of a standard normal z statistic.
pub fn wald_p_value(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Percent change in the expected count for a unit increase: (eᵇ − 1)·100.
pub fn rate_ratio_percent(b: f64) -> f64 {
    b.exp_m1() * 100.0
}

/// Odds after doubling a log2-scaled covariate, as a percent of the original: 2ᵇ·100.
pub fn doubling_odds_percent(b: f64) -> f64 {
    b.exp2() * 100.0
}

/// One decimal, e.g. `60.0%`.
pub fn format_rate_ratio(b: f64) -> String {
    format!("{:.1}%", rate_ratio_percent(b))
}

/// Whole percent, e.g. `108%`.
pub fn format_doubling_odds(b: f64) -> String {
    format!("{:.0}%", doubling_odds_percent(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_values() {
        let d = wald_p_value(1.959963984540054) - 0.05; assert!(d.abs() < 1e-9, "{d}");
        assert_eq!(wald_p_value(0.0), 1.0);
        assert_eq!(wald_p_value(-3.0), wald_p_value(3.0));
        assert_eq!(stars(0.0009), "***");
        assert_eq!(stars(0.009), "**");
        assert_eq!(stars(0.049), "*");
        assert_eq!(stars(0.05), "");
    }

    #[test]
    fn transforms() {
        assert_eq!(format_rate_ratio(0.47), "60.0%");
        assert_eq!(format_rate_ratio(0.27), "31.0%");
        assert_eq!(format_rate_ratio(0.08), "8.3%");
        assert_eq!(format_rate_ratio(0.14), "15.0%");
        assert_eq!(format_rate_ratio(0.0), "0.0%");
        assert_eq!(format_doubling_odds(0.11), "108%");
        assert_eq!(format_doubling_odds(0.24), "118%");
        assert_eq!(format_doubling_odds(0.0), "100%");
        assert_eq!(rate_ratio_percent(0.0), 0.0);
    }
}
