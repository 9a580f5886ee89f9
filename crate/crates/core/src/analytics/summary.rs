use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::MentionTable;
use crate::model::{Field, LinkClass};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// `None` on the total row.
    pub field: Option<Field>,
    pub papers: u64,
    pub papers_with_links: u64,
    /// Mentions per class, indexed by [`LinkClass::index`].
    pub mentions: [u64; 3],
    /// Unique canonical URLs per class.
    pub unique: [u64; 3],
}

impl SummaryRow {
    pub fn total_mentions(&self) -> u64 {
        self.mentions.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryTable {
    /// One row per field, in [`Field::ALL`] order.
    pub fields: Vec<SummaryRow>,
    pub total: SummaryRow,
}

/// Per-field paper and link counts.
///
/// Paper and mention totals are column sums. The total row's unique counts
/// deduplicate URLs shared between fields, so they can be below the column sum.
pub fn summary_table(table: &MentionTable) -> SummaryTable {
    let row_for = |field: Option<Field>| {
        let in_field = |f: Field| field.is_none_or(|x| x == f);
        let papers = table.papers().iter().filter(|p| in_field(p.field)).count() as u64;
        let mut with_links = HashSet::new();
        let mut mentions = [0u64; 3];
        let mut unique: [HashSet<&str>; 3] = Default::default();
        for row in table.rows() {
            if !in_field(table.paper_of(row).field) {
                continue;
            }
            with_links.insert(row.paper);
            mentions[row.class.index()] += 1;
            unique[row.class.index()].insert(row.mention.canonical.as_str());
        }
        SummaryRow {
            field,
            papers,
            papers_with_links: with_links.len() as u64,
            mentions,
            unique: unique.map(|s| s.len() as u64),
        }
    };
    let fields: Vec<SummaryRow> = Field::ALL.iter().map(|f| row_for(Some(*f))).collect();
    let total = row_for(None);
    debug_assert_eq!(total.papers, fields.iter().map(|r| r.papers).sum::<u64>());
    debug_assert!(LinkClass::ALL
        .iter()
        .all(|c| total.mentions[c.index()] == fields.iter().map(|r| r.mentions[c.index()]).sum::<u64>()));
    SummaryTable { fields, total }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    #[test]
    fn zero_links() {
        let t = table(vec![paper("a", "2012-01-01", Field::Physics)], vec![]);
        let s = summary_table(&t);
        assert_eq!(s.total.papers, 1);
        assert_eq!(s.total.papers_with_links, 0);
        assert_eq!(s.total.mentions, [0; 3]);
        assert_eq!(s.total.unique, [0; 3]);
    }

    #[test]
    fn repeated_url_counts_once() {
        let t = table(
            vec![paper("a", "2012-01-01", Field::ComputerScience)],
            vec![
                mention("a", "http://x.org/d", LinkClass::Data),
                mention("a", "http://x.org/d", LinkClass::Data),
            ],
        );
        let cs = &summary_table(&t).fields[0];
        assert_eq!(cs.mentions[LinkClass::Data.index()], 2);
        assert_eq!(cs.unique[LinkClass::Data.index()], 1);
    }

    #[test]
    fn totals() {
        let t = table(
            vec![
                paper("a", "2012-01-01", Field::ComputerScience),
                paper("b", "2012-01-01", Field::Physics),
                paper("c", "2012-01-01", Field::Physics),
            ],
            vec![
                mention("a", "http://x.org/d", LinkClass::Data),
                mention("b", "http://x.org/d", LinkClass::Data),
                mention("b", "http://y.org", LinkClass::Methods),
            ],
        );
        let s = summary_table(&t);
        assert_eq!(s.fields[1].papers, 2);
        assert_eq!(s.fields[1].papers_with_links, 1);
        assert_eq!(s.total.papers_with_links, 2);
        assert_eq!(s.total.mentions, [2, 1, 0]);
        assert_eq!(s.total.unique, [1, 1, 0]);
        assert_eq!(s.fields[0].unique[0] + s.fields[1].unique[0], 2);
    }
}
