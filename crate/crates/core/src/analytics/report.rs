use serde::{Deserialize, Serialize};

use super::{
    alive_proportion_by_year, class_proportions, concentration, domain_gini, mark_reuse, position_heatmap,
    reuse_proportion, reused_unique_per_paper, summary_table, top_k, Cell, ConcentrationStats, DomainUnit,
    MentionTable, PositionHeatmap, SummaryTable, TopKGroup,
};
use crate::model::{Field, LinkClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsOptions {
    /// Percentile for the top-share statistic.
    pub top_percent: f64,
    /// Years pooled for the top-share statistic; the full span when `None`.
    pub concentration_years: Option<(i32, i32)>,
    pub top_k: usize,
    pub domain_unit: DomainUnit,
}

impl Default for AnalyticsOptions {
    fn default() -> Self {
        AnalyticsOptions {
            top_percent: 1.0,
            concentration_years: None,
            top_k: 10,
            domain_unit: DomainUnit::Registrable,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageRow {
    pub year: i32,
    pub field: Field,
    pub class: LinkClass,
    pub papers: u64,
    pub mentions: u64,
    pub per_paper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiniRow {
    pub year: i32,
    pub field: Field,
    pub class: LinkClass,
    pub n_domains: u64,
    pub n_mentions: u64,
    pub gini: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseRow {
    pub year: i32,
    pub field: Field,
    pub class: LinkClass,
    pub papers: u64,
    pub reused_unique: u64,
    pub reused_per_paper: Option<f64>,
    pub mentions: u64,
    pub reused_mentions: u64,
    pub reuse_proportion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionRow {
    pub year: i32,
    pub field: Field,
    pub mentions: u64,
    /// Data, methods and supplement shares.
    pub shares: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub field: Field,
    pub class: LinkClass,
    pub stats: Option<ConcentrationStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LivenessRow {
    pub year: i32,
    pub field: Field,
    pub class: LinkClass,
    pub probed: u64,
    pub alive: u64,
    pub proportion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKRow {
    pub field: Field,
    pub class: LinkClass,
    pub rank: usize,
    pub key: String,
    pub count: u64,
}

/// Every descriptive statistic, grouped by export family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub years: Option<(i32, i32)>,
    pub options: AnalyticsOptions,
    pub table1_summary: SummaryTable,
    pub fig1_usage: Vec<UsageRow>,
    pub fig2_gini: Vec<GiniRow>,
    pub fig3_reuse: Vec<ReuseRow>,
    pub fig4_positions: Vec<PositionHeatmap>,
    pub fig11_proportions: Vec<ProportionRow>,
    pub fig12_concentration: Vec<ConcentrationRow>,
    pub fig19_liveness: Vec<LivenessRow>,
    pub topk_domains: Vec<TopKRow>,
    pub topk_urls: Vec<TopKRow>,
}

fn cells(years: Option<(i32, i32)>) -> Vec<(i32, Field, LinkClass)> {
    let Some((lo, hi)) = years else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for year in lo..=hi {
        for field in Field::ALL {
            for class in LinkClass::ALL {
                out.push((year, field, class));
            }
        }
    }
    out
}

pub fn build_report(table: &MentionTable, options: &AnalyticsOptions) -> AnalyticsReport {
    let years = table.year_span();
    let marks = mark_reuse(table);

    let mut fig1_usage = Vec::new();
    let mut fig2_gini = Vec::new();
    let mut fig3_reuse = Vec::new();
    for (year, field, class) in cells(years) {
        let cell = Cell::new(Some(year), Some(field), Some(class));
        let papers = table.count_papers(&cell) as u64;
        let mentions = table.select(&cell).count() as u64;
        fig1_usage.push(UsageRow {
            year,
            field,
            class,
            papers,
            mentions,
            per_paper: (papers > 0).then(|| mentions as f64 / papers as f64),
        });
        let domains = super::domain_counts(table, &cell, options.domain_unit);
        fig2_gini.push(GiniRow {
            year,
            field,
            class,
            n_domains: domains.len() as u64,
            n_mentions: mentions,
            gini: domain_gini(table, &cell, options.domain_unit),
        });
        let reused_unique: u64 = reused_unique_per_paper(table, &marks, &cell).values().sum();
        let reused_mentions = table
            .rows()
            .iter()
            .zip(&marks.is_reuse)
            .filter(|(r, reused)| **reused && table.row_matches(&cell, r))
            .count() as u64;
        fig3_reuse.push(ReuseRow {
            year,
            field,
            class,
            papers,
            reused_unique,
            reused_per_paper: (papers > 0).then(|| reused_unique as f64 / papers as f64),
            mentions,
            reused_mentions,
            reuse_proportion: reuse_proportion(table, &marks, &cell),
        });
    }

    let mut fig11_proportions = Vec::new();
    if let Some((lo, hi)) = years {
        for year in lo..=hi {
            for field in Field::ALL {
                fig11_proportions.push(ProportionRow {
                    year,
                    field,
                    mentions: table.select(&Cell::new(Some(year), Some(field), None)).count() as u64,
                    shares: class_proportions(table, year, field),
                });
            }
        }
    }

    let mut fig4_positions = Vec::new();
    let mut fig12_concentration = Vec::new();
    let mut fig19_liveness = Vec::new();
    let mut topk_domains = Vec::new();
    let mut topk_urls = Vec::new();
    let span = options.concentration_years.or(years);
    for field in Field::ALL {
        for class in LinkClass::ALL {
            fig4_positions.push(position_heatmap(table, field, class));
            let stats = span.and_then(|s| {
                concentration(
                    table,
                    &Cell::span(s, Some(field), Some(class)),
                    options.top_percent,
                    options.domain_unit,
                )
            });
            fig12_concentration.push(ConcentrationRow { field, class, stats });
            fig19_liveness.extend(alive_proportion_by_year(table, field, class).into_iter().map(|c| {
                LivenessRow {
                    year: c.year,
                    field,
                    class,
                    probed: c.probed,
                    alive: c.alive,
                    proportion: c.proportion,
                }
            }));
            let cell = Cell::new(None, Some(field), Some(class));
            for (group, out) in [(TopKGroup::Domain, &mut topk_domains), (TopKGroup::Url, &mut topk_urls)] {
                out.extend(
                    top_k(table, group, &cell, options.top_k)
                        .into_iter()
                        .enumerate()
                        .map(|(i, (key, count))| TopKRow {
                            field,
                            class,
                            rank: i + 1,
                            key,
                            count,
                        }),
                );
            }
        }
    }

    AnalyticsReport {
        years,
        options: options.clone(),
        table1_summary: summary_table(table),
        fig1_usage,
        fig2_gini,
        fig3_reuse,
        fig4_positions,
        fig11_proportions,
        fig12_concentration,
        fig19_liveness,
        topk_domains,
        topk_urls,
    }
}
