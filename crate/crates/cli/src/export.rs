//! CSV export families. Every file has a fixed header and row order; empty
//! cells are written as `NA`.

use std::collections::BTreeMap;

use linkmine::analytics::{AnalyticsReport, SummaryRow};
use linkmine::probe::{FinalStatus, ProbeResult, TransportErrorKind};
use linkmine::regress::{format_doubling_odds, format_rate_ratio, RegressionFit};
use linkmine::LinkClass;

use crate::stage::{ModelOutcome, RegressionOutput};

pub const MISSING: &str = "NA";

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        MISSING.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), num)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn table1(report: &AnalyticsReport) -> Vec<u8> {
    let row = |name: &str, r: &SummaryRow| {
        let mut v = vec![name.to_string(), r.papers.to_string(), r.papers_with_links.to_string()];
        v.extend(r.mentions.iter().map(u64::to_string));
        v.push(r.total_mentions().to_string());
        v.extend(r.unique.iter().map(u64::to_string));
        v
    };
    let t = &report.table1_summary;
    let mut rows: Vec<Vec<String>> = t
        .fields
        .iter()
        .map(|r| row(r.field.map_or("total", |f| f.code()), r))
        .collect();
    rows.push(row("total", &t.total));
    csv_bytes(
        &[
            "field",
            "papers",
            "papers_with_links",
            "links_data",
            "links_methods",
            "links_supplement",
            "links_total",
            "unique_data",
            "unique_methods",
            "unique_supplement",
        ],
        &rows,
    )
}

fn describe(status: FinalStatus) -> &'static str {
    match status {
        FinalStatus::Http(200) => "OK",
        FinalStatus::Http(301) => "Moved permanently",
        FinalStatus::Http(302) => "Found",
        FinalStatus::Http(400) => "Bad request",
        FinalStatus::Http(401) => "Unauthorized",
        FinalStatus::Http(403) => "Forbidden",
        FinalStatus::Http(404) => "Not found",
        FinalStatus::Http(410) => "Gone",
        FinalStatus::Http(429) => "Too many requests",
        FinalStatus::Http(500) => "Internal server error",
        FinalStatus::Http(502) => "Bad gateway",
        FinalStatus::Http(503) => "Service unavailable",
        FinalStatus::Http(_) => "",
        FinalStatus::Error(TransportErrorKind::ConnectionError) => "Connection failed",
        FinalStatus::Error(TransportErrorKind::SslError) => "TLS handshake or certificate failure",
        FinalStatus::Error(TransportErrorKind::ConnectTimeout) => "No connection within the timeout",
        FinalStatus::Error(TransportErrorKind::ReadTimeout) => "No response within the timeout",
        FinalStatus::Error(TransportErrorKind::TooManyRedirects) => "Redirect limit exceeded",
    }
}

/// Probe outcomes by final status, most frequent first.
pub fn probe_outcomes(results: &[&ProbeResult]) -> Vec<(FinalStatus, u64)> {
    let mut counts: BTreeMap<FinalStatus, u64> = BTreeMap::new();
    for r in results {
        *counts.entry(r.final_status).or_default() += 1;
    }
    let mut out: Vec<_> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

pub fn table4(results: &[&ProbeResult]) -> Vec<u8> {
    let total = results.len() as f64;
    let rows: Vec<Vec<String>> = probe_outcomes(results)
        .into_iter()
        .map(|(status, n)| {
            vec![
                status.to_string(),
                n.to_string(),
                format!("{:.1}%", 100.0 * n as f64 / total),
                describe(status).to_string(),
            ]
        })
        .collect();
    csv_bytes(&["status", "links", "proportion", "description"], &rows)
}

const FIT_HEADER: [&str; 8] = ["term", "beta", "se", "z", "p", "stars", "effect", "note"];

fn fit_rows(model: &ModelOutcome, columns: &[&str], effect: impl Fn(&str, f64) -> String) -> Vec<Vec<String>> {
    let Some(fit) = &model.fit else {
        let note = model.error.clone().unwrap_or_default();
        return columns
            .iter()
            .map(|c| {
                let mut r = vec![c.to_string()];
                r.extend(std::iter::repeat_n(MISSING.to_string(), 6));
                r.push(note.clone());
                r
            })
            .collect();
    };
    let mut rows = Vec::new();
    for r in fit.report_rows() {
        let beta = fit.coef(&r[0]);
        let mut row: Vec<String> = r.to_vec();
        row.push(beta.map(|b| effect(&r[0], b)).unwrap_or_default());
        row.push(String::new());
        rows.push(row);
    }
    rows.push(convergence_row(fit, model.rows));
    rows
}

fn convergence_row(fit: &RegressionFit, n: usize) -> Vec<String> {
    vec![
        "converged".into(),
        fit.converged.to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        format!("n={n} iterations={}", fit.iterations),
        fit.diagnostic.clone().unwrap_or_default(),
    ]
}

pub fn table5(reg: &RegressionOutput) -> Vec<u8> {
    let rows = fit_rows(&reg.liveness, &linkmine::regress::LIVENESS_COLUMNS, |term, b| {
        if term.starts_with("log2_") {
            format_doubling_odds(b)
        } else {
            String::new()
        }
    });
    csv_bytes(&FIT_HEADER, &rows)
}

pub fn table6(reg: &RegressionOutput) -> Vec<u8> {
    let rows = fit_rows(&reg.citation, &linkmine::regress::CITATION_COLUMNS, |term, b| {
        if term == "intercept" {
            String::new()
        } else {
            format_rate_ratio(b)
        }
    });
    csv_bytes(&FIT_HEADER, &rows)
}

pub fn fig1(r: &AnalyticsReport) -> Vec<u8> {
    let rows: Vec<Vec<String>> = r
        .fig1_usage
        .iter()
        .map(|u| {
            vec![
                u.year.to_string(),
                u.field.code().into(),
                u.class.label().into(),
                u.papers.to_string(),
                u.mentions.to_string(),
                opt(u.per_paper),
            ]
        })
        .collect();
    csv_bytes(&["year", "field", "class", "papers", "mentions", "per_paper"], &rows)
}

pub fn fig2(r: &AnalyticsReport) -> Vec<u8> {
    let rows: Vec<Vec<String>> = r
        .fig2_gini
        .iter()
        .map(|g| {
            vec![
                g.year.to_string(),
                g.field.code().into(),
                g.class.label().into(),
                g.n_domains.to_string(),
                g.n_mentions.to_string(),
                opt(g.gini),
            ]
        })
        .collect();
    csv_bytes(&["year", "field", "class", "domains", "mentions", "gini"], &rows)
}

pub fn fig3(r: &AnalyticsReport) -> Vec<u8> {
    let rows: Vec<Vec<String>> = r
        .fig3_reuse
        .iter()
        .map(|x| {
            vec![
                x.year.to_string(),
                x.field.code().into(),
                x.class.label().into(),
                x.papers.to_string(),
                x.reused_unique.to_string(),
                opt(x.reused_per_paper),
                x.mentions.to_string(),
                x.reused_mentions.to_string(),
                opt(x.reuse_proportion),
            ]
        })
        .collect();
    csv_bytes(
        &[
            "year",
            "field",
            "class",
            "papers",
            "reused_unique",
            "reused_per_paper",
            "mentions",
            "reused_mentions",
            "reuse_proportion",
        ],
        &rows,
    )
}

pub fn fig4(r: &AnalyticsReport) -> Vec<u8> {
    let mut header = vec!["field", "class", "year", "mentions"];
    let bins: Vec<String> = (0..10).map(|i| format!("decile_{i}")).collect();
    header.extend(bins.iter().map(String::as_str));
    let mut rows = Vec::new();
    for h in &r.fig4_positions {
        for row in &h.rows {
            let mut v = vec![
                h.field.code().to_string(),
                h.class.label().to_string(),
                row.year.to_string(),
                row.counts.iter().sum::<u64>().to_string(),
            ];
            if row.empty {
                v.extend(std::iter::repeat_n(MISSING.to_string(), 10));
            } else {
                v.extend(row.probs.iter().map(|p| num(*p)));
            }
            rows.push(v);
        }
    }
    csv_bytes(&header, &rows)
}

pub fn fig11(r: &AnalyticsReport) -> Vec<u8> {
    let rows: Vec<Vec<String>> = r
        .fig11_proportions
        .iter()
        .map(|p| {
            let mut v = vec![p.year.to_string(), p.field.code().into(), p.mentions.to_string()];
            for c in LinkClass::ALL {
                v.push(opt(p.shares.map(|s| s[c.index()])));
            }
            v
        })
        .collect();
    csv_bytes(&["year", "field", "mentions", "data", "methods", "supplement"], &rows)
}

pub fn fig12(r: &AnalyticsReport) -> Vec<u8> {
    let rows: Vec<Vec<String>> = r
        .fig12_concentration
        .iter()
        .map(|c| {
            let mut v = vec![c.field.code().to_string(), c.class.label().to_string()];
            match &c.stats {
                Some(s) => v.extend([
                    s.years.0.to_string(),
                    s.years.1.to_string(),
                    s.n_domains.to_string(),
                    s.n_unique_urls.to_string(),
                    s.n_mentions.to_string(),
                    num(s.gini),
                    num(s.top_share),
                ]),
                None => v.extend(std::iter::repeat_n(MISSING.to_string(), 7)),
            }
            v
        })
        .collect();
    csv_bytes(
        &[
            "field",
            "class",
            "year_from",
            "year_to",
            "domains",
            "unique_urls",
            "mentions",
            "gini",
            "top_share",
        ],
        &rows,
    )
}

pub fn fig19(r: &AnalyticsReport) -> Vec<u8> {
    let rows: Vec<Vec<String>> = r
        .fig19_liveness
        .iter()
        .map(|l| {
            vec![
                l.year.to_string(),
                l.field.code().into(),
                l.class.label().into(),
                l.probed.to_string(),
                l.alive.to_string(),
                opt(l.proportion),
            ]
        })
        .collect();
    csv_bytes(&["year", "field", "class", "probed", "alive", "alive_proportion"], &rows)
}

fn topk(rows: &[linkmine::analytics::TopKRow]) -> Vec<u8> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|t| {
            vec![
                t.field.code().into(),
                t.class.label().into(),
                t.rank.to_string(),
                t.key.clone(),
                t.count.to_string(),
            ]
        })
        .collect();
    csv_bytes(&["field", "class", "rank", "key", "mentions"], &rows)
}

/// Every export as `(file name, bytes)`, sorted by name.
pub fn all_reports(
    analytics: &AnalyticsReport,
    regression: &RegressionOutput,
    probes: &[&ProbeResult],
) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![
        ("table1_summary.csv", table1(analytics)),
        ("table4_probe_outcomes.csv", table4(probes)),
        ("table5_liveness_logit.csv", table5(regression)),
        ("table6_citation_negbin.csv", table6(regression)),
        ("fig1_usage.csv", fig1(analytics)),
        ("fig2_gini.csv", fig2(analytics)),
        ("fig3_reuse.csv", fig3(analytics)),
        ("fig4_positions.csv", fig4(analytics)),
        ("fig11_proportions.csv", fig11(analytics)),
        ("fig12_concentration.csv", fig12(analytics)),
        ("fig19_liveness.csv", fig19(analytics)),
        ("topk_domains.csv", topk(&analytics.topk_domains)),
        ("topk_urls.csv", topk(&analytics.topk_urls)),
    ];
    files.sort_by(|a, b| a.0.cmp(b.0));
    files.into_iter().map(|(n, b)| (n.to_string(), b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use linkmine::extract::Scheme;

    fn result(status: FinalStatus) -> ProbeResult {
        ProbeResult {
            canonical: "https://x.org".into(),
            scheme_used: Scheme::Https,
            final_status: status,
            redirect_hops: 0,
            alive: status == FinalStatus::Http(200),
            probed_at: Utc.with_ymd_and_hms(2022, 10, 3, 0, 0, 0).unwrap(),
        }
    }

    #[test]
    fn table4_counts_and_percentages() {
        let rs: Vec<ProbeResult> = [200, 200, 404, 200, 200]
            .into_iter()
            .map(|c| result(FinalStatus::Http(c)))
            .collect();
        let refs: Vec<&ProbeResult> = rs.iter().collect();
        let text = String::from_utf8(table4(&refs)).unwrap();
        assert_eq!(
            text,
            "status,links,proportion,description\n200,4,80.0%,OK\n404,1,20.0%,Not found\n"
        );
    }

    #[test]
    fn outcome_ties_order_by_status() {
        let rs = [
            result(FinalStatus::Error(TransportErrorKind::SslError)),
            result(FinalStatus::Http(503)),
        ];
        let refs: Vec<&ProbeResult> = rs.iter().collect();
        let got: Vec<String> = probe_outcomes(&refs).iter().map(|(s, _)| s.to_string()).collect();
        assert_eq!(got, ["503", "SSLError"]);
    }

    #[test]
    fn failed_model_keeps_schema() {
        let m = ModelOutcome {
            rows: 3,
            fit: None,
            error: Some("singular".into()),
        };
        let rows = fit_rows(&m, &["intercept", "x"], |_, _| String::new());
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1], ["x", "NA", "NA", "NA", "NA", "NA", "NA", "singular"]);
    }

    #[test]
    fn csv_quotes_when_needed() {
        let b = csv_bytes(&["a"], &[vec!["x,y".into()]]);
        assert_eq!(b, b"a\n\"x,y\"\n");
    }
}
