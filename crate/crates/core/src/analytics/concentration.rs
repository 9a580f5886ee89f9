use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Cell, MentionTable};
use crate::extract::normalize_url;
use crate::model::{Field, LinkClass};

/// How mentions are grouped into domains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainUnit {
    /// Public suffix plus one label, e.g. `github.com`.
    #[default]
    Registrable,
    /// Full host name, e.g. `gist.github.com`.
    Host,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopKGroup {
    Domain,
    Url,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationStats {
    pub years: (i32, i32),
    pub field: Option<Field>,
    pub class: Option<LinkClass>,
    pub gini: f64,
    pub top_share: f64,
    pub n_domains: usize,
    pub n_unique_urls: usize,
    pub n_mentions: usize,
}

/// Gini coefficient of a count vector. `None` for an empty or all-zero vector.
///
/// Uses the sorted form Σᵢ (2i − n − 1) x₍ᵢ₎ / (n Σx), with exact integer sums.
pub fn gini(counts: &[u64]) -> Option<f64> {
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if total == 0 {
        return None;
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as i128;
    let num: i128 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2 * (i as i128 + 1) - n - 1) * x as i128)
        .sum();
    Some(num as f64 / (n as f64 * total as f64))
}

fn host_of(canonical: &str) -> String {
    normalize_url(canonical).map_or_else(|_| canonical.to_string(), |u| u.host)
}

/// Mention counts per domain within the cell.
pub fn domain_counts(table: &MentionTable, cell: &Cell, unit: DomainUnit) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for row in table.select(cell) {
        let key = match unit {
            DomainUnit::Registrable => row.mention.domain.clone(),
            DomainUnit::Host => host_of(&row.mention.canonical),
        };
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

fn url_counts(table: &MentionTable, cell: &Cell) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for row in table.select(cell) {
        *out.entry(row.mention.canonical.clone()).or_insert(0) += 1;
    }
    out
}

pub fn domain_gini(table: &MentionTable, cell: &Cell, unit: DomainUnit) -> Option<f64> {
    let counts: Vec<u64> = domain_counts(table, cell, unit).into_values().collect();
    gini(&counts)
}

/// Sorts descending by count, ties by key.
fn ranked(counts: BTreeMap<String, u64>) -> Vec<(String, u64)> {
    let mut v: Vec<(String, u64)> = counts.into_iter().collect();
    v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}

/// Share of all mentions held by the top ⌈p·n/100⌉ keys.
pub fn top_share_of_counts(counts: &BTreeMap<String, u64>, p: f64) -> Option<f64> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return None;
    }
    let ranked = ranked(counts.clone());
    let k = top_count(p, ranked.len());
    let top: u64 = ranked.iter().take(k).map(|(_, c)| c).sum();
    Some(top as f64 / total as f64)
}

fn top_count(p: f64, n: usize) -> usize {
    let raw = p.clamp(0.0, 100.0) * n as f64 / 100.0;
    // Absorb rounding noise such as 3.0000000000000004.
    ((raw - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Share of the cell's mentions going to its most-mentioned p% of unique URLs.
pub fn top_percentile_share(table: &MentionTable, cell: &Cell, p: f64) -> Option<f64> {
    top_share_of_counts(&url_counts(table, cell), p)
}

pub fn concentration(table: &MentionTable, cell: &Cell, p: f64, unit: DomainUnit) -> Option<ConcentrationStats> {
    let urls = url_counts(table, cell);
    let domains = domain_counts(table, cell, unit);
    let n_mentions: u64 = urls.values().sum();
    let years = cell.years.or_else(|| table.year_span())?;
    Some(ConcentrationStats {
        years,
        field: cell.field,
        class: cell.class,
        gini: gini(&domains.values().copied().collect::<Vec<_>>())?,
        top_share: top_share_of_counts(&urls, p)?,
        n_domains: domains.len(),
        n_unique_urls: urls.len(),
        n_mentions: n_mentions as usize,
    })
}

/// Most-mentioned domains or URLs, descending by count, ties by name; at most `k`.
pub fn top_k(table: &MentionTable, group: TopKGroup, cell: &Cell, k: usize) -> Vec<(String, u64)> {
    let counts = match group {
        TopKGroup::Domain => domain_counts(table, cell, DomainUnit::Registrable),
        TopKGroup::Url => url_counts(table, cell),
    };
    let mut v = ranked(counts);
    v.truncate(k);
    v
}
