//! Descriptive statistics over the joined mention table.
//!
//! Years are always the submit year of the mentioning paper.

mod concentration;
mod liveness;
mod position;
mod report;
mod reuse;
mod summary;
mod usage;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Field, LinkClass, PaperMeta};
use crate::probe::{Liveness, ProbeResult};
use crate::records::MentionRecord;

pub use concentration::{
    concentration, domain_counts, domain_gini, gini, top_k, top_percentile_share, top_share_of_counts,
    ConcentrationStats, DomainUnit, TopKGroup,
};
pub use liveness::{alive_proportion, alive_proportion_by_year, LivenessCell};
pub use position::{position_heatmap, HeatmapRow, PositionHeatmap};
pub use report::{
    build_report, AnalyticsOptions, AnalyticsReport, ConcentrationRow, GiniRow, LivenessRow, ProportionRow, ReuseRow,
    TopKRow, UsageRow,
};
pub use reuse::{mark_reuse, reuse_proportion, reused_links_per_paper, reused_unique_per_paper, ReuseMarks};
pub use summary::{summary_table, SummaryRow, SummaryTable};
pub use usage::{class_proportions, mentions_per_paper};

/// Probe outcome attached to a mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMark {
    /// Not probed, e.g. `ftp://` links.
    Unprobed,
    Probed(Liveness),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    /// Index into [`MentionTable::papers`].
    pub paper: usize,
    pub class: LinkClass,
    pub probe: ProbeMark,
    pub mention: MentionRecord,
}

/// Classified mentions joined to their papers and probe outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct MentionTable {
    papers: Vec<PaperMeta>,
    rows: Vec<TableRow>,
}

/// Selects rows by year span, field and class; `None` matches everything.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cell {
    pub years: Option<(i32, i32)>,
    pub field: Option<Field>,
    pub class: Option<LinkClass>,
}

impl Cell {
    pub fn new(year: Option<i32>, field: Option<Field>, class: Option<LinkClass>) -> Self {
        Cell {
            years: year.map(|y| (y, y)),
            field,
            class,
        }
    }

    pub fn span(years: (i32, i32), field: Option<Field>, class: Option<LinkClass>) -> Self {
        Cell {
            years: Some(years),
            field,
            class,
        }
    }

    pub fn paper_matches(&self, paper: &PaperMeta) -> bool {
        let year_ok = self
            .years
            .is_none_or(|(lo, hi)| (lo..=hi).contains(&paper.year()));
        year_ok && self.field.is_none_or(|f| f == paper.field)
    }
}

impl MentionTable {
    /// Joins mentions to papers and to probe results keyed by canonical URL.
    pub fn new(
        papers: Vec<PaperMeta>,
        mentions: Vec<MentionRecord>,
        probes: &HashMap<String, ProbeResult>,
    ) -> Result<Self> {
        let liveness = probes
            .iter()
            .map(|(k, r)| (k.clone(), r.liveness()))
            .collect();
        Self::with_liveness(papers, mentions, &liveness)
    }

    pub fn with_liveness(
        mut papers: Vec<PaperMeta>,
        mentions: Vec<MentionRecord>,
        liveness: &HashMap<String, Liveness>,
    ) -> Result<Self> {
        papers.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        if let Some(w) = papers.windows(2).find(|w| w[0].paper_id == w[1].paper_id) {
            return Err(Error::DuplicatePaper(w[0].paper_id.clone()));
        }
        let index: HashMap<&str, usize> = papers
            .iter()
            .enumerate()
            .map(|(i, p)| (p.paper_id.as_str(), i))
            .collect();
        let mut rows = Vec::with_capacity(mentions.len());
        for m in mentions {
            let paper = *index.get(m.paper_id.as_str()).ok_or_else(|| {
                Error::Invalid(format!("mention of {} refers to an unknown paper", m.canonical))
            })?;
            let class = m.class.ok_or_else(|| {
                Error::Invalid(format!("mention of {} in {} is unclassified", m.canonical, m.paper_id))
            })?;
            let probe = liveness
                .get(&m.canonical)
                .map_or(ProbeMark::Unprobed, |l| ProbeMark::Probed(*l));
            rows.push(TableRow {
                paper,
                class,
                probe,
                mention: m,
            });
        }
        Ok(MentionTable { papers, rows })
    }

    /// Papers sorted by id.
    pub fn papers(&self) -> &[PaperMeta] {
        &self.papers
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn paper_of(&self, row: &TableRow) -> &PaperMeta {
        &self.papers[row.paper]
    }

    pub fn year_of(&self, row: &TableRow) -> i32 {
        self.papers[row.paper].year()
    }

    pub fn row_matches(&self, cell: &Cell, row: &TableRow) -> bool {
        cell.class.is_none_or(|c| c == row.class) && cell.paper_matches(&self.papers[row.paper])
    }

    /// Rows selected by `cell`, in table order.
    pub fn select<'a>(&'a self, cell: &'a Cell) -> impl Iterator<Item = &'a TableRow> + 'a {
        self.rows.iter().filter(move |r| self.row_matches(cell, r))
    }

    pub fn count_papers(&self, cell: &Cell) -> usize {
        self.papers.iter().filter(|p| cell.paper_matches(p)).count()
    }

    /// First and last submit year over all papers.
    pub fn year_span(&self) -> Option<(i32, i32)> {
        let years = self.papers.iter().map(PaperMeta::year);
        Some((years.clone().min()?, years.max()?))
    }
}
