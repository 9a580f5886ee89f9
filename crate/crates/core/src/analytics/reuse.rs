use std::collections::{BTreeMap, HashMap, HashSet};

use super::{Cell, MentionTable};

/// Introduction paper per URL and a reuse flag per table row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReuseMarks {
    /// Canonical URL to the index of its introduction paper.
    pub introducer: HashMap<String, usize>,
    /// Parallel to [`MentionTable::rows`].
    pub is_reuse: Vec<bool>,
}

/// The introduction paper of a URL is its earliest mentioning paper
/// (ties to the smallest paper id); every mention from another paper is a reuse.
pub fn mark_reuse(table: &MentionTable) -> ReuseMarks {
    let papers = table.papers();
    let mut introducer: HashMap<String, usize> = HashMap::new();
    for row in table.rows() {
        let key = |i: usize| (papers[i].submit_date, papers[i].paper_id.as_str());
        introducer
            .entry(row.mention.canonical.clone())
            .and_modify(|cur| {
                if key(row.paper) < key(*cur) {
                    *cur = row.paper;
                }
            })
            .or_insert(row.paper);
    }
    let is_reuse = table
        .rows()
        .iter()
        .map(|r| introducer[&r.mention.canonical] != r.paper)
        .collect();
    ReuseMarks { introducer, is_reuse }
}

/// Unique reused URLs per paper id, for the papers in `cell` (class filter applies to mentions).
/// Papers without reuse are listed with 0.
pub fn reused_unique_per_paper(table: &MentionTable, marks: &ReuseMarks, cell: &Cell) -> BTreeMap<String, u64> {
    let mut sets: BTreeMap<&str, HashSet<&str>> = table
        .papers()
        .iter()
        .filter(|p| cell.paper_matches(p))
        .map(|p| (p.paper_id.as_str(), HashSet::new()))
        .collect();
    for (row, reused) in table.rows().iter().zip(&marks.is_reuse) {
        if *reused && table.row_matches(cell, row) {
            sets.get_mut(row.mention.paper_id.as_str())
                .expect("paper in cell")
                .insert(row.mention.canonical.as_str());
        }
    }
    sets.into_iter().map(|(k, v)| (k.to_string(), v.len() as u64)).collect()
}

/// Mean number of unique reused URLs over all papers in the cell.
pub fn reused_links_per_paper(table: &MentionTable, marks: &ReuseMarks, cell: &Cell) -> Option<f64> {
    let per_paper = reused_unique_per_paper(table, marks, cell);
    if per_paper.is_empty() {
        return None;
    }
    Some(per_paper.values().sum::<u64>() as f64 / per_paper.len() as f64)
}

/// Reused mentions over all mentions in the cell.
pub fn reuse_proportion(table: &MentionTable, marks: &ReuseMarks, cell: &Cell) -> Option<f64> {
    let (mut reused, mut total) = (0u64, 0u64);
    for (row, r) in table.rows().iter().zip(&marks.is_reuse) {
        if table.row_matches(cell, row) {
            total += 1;
            reused += u64::from(*r);
        }
    }
    (total > 0).then(|| reused as f64 / total as f64)
}
