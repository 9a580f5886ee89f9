use super::{Cell, MentionTable};
use crate::model::{Field, LinkClass};

/// Class mentions per paper, averaged over every paper in the cell,
/// including papers without links. `None` when the cell has no papers.
pub fn mentions_per_paper(table: &MentionTable, year: i32, field: Field, class: LinkClass) -> Option<f64> {
    let cell = Cell::new(Some(year), Some(field), Some(class));
    let papers = table.count_papers(&cell);
    if papers == 0 {
        return None;
    }
    Some(table.select(&cell).count() as f64 / papers as f64)
}

/// Shares of data, methods and supplement mentions. `None` when the cell has no mentions.
pub fn class_proportions(table: &MentionTable, year: i32, field: Field) -> Option<[f64; 3]> {
    let cell = Cell::new(Some(year), Some(field), None);
    let mut counts = [0u64; 3];
    for row in table.select(&cell) {
        counts[row.class.index()] += 1;
    }
    let total: u64 = counts.iter().sum();
    (total > 0).then(|| counts.map(|c| c as f64 / total as f64))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    #[test]
    fn per_paper_includes_linkless_papers() {
        let t = table(
            (0..4)
                .map(|i| paper(&format!("p{i}"), "2013-05-01", Field::ComputerScience))
                .collect(),
            vec![
                mention("p0", "http://x.org/1", LinkClass::Data),
                mention("p1", "http://x.org/2", LinkClass::Data),
            ],
        );
        assert_eq!(mentions_per_paper(&t, 2013, Field::ComputerScience, LinkClass::Data), Some(0.5));
        assert_eq!(mentions_per_paper(&t, 2013, Field::ComputerScience, LinkClass::Methods), Some(0.0));
        assert_eq!(mentions_per_paper(&t, 2014, Field::ComputerScience, LinkClass::Data), None);
    }

    #[test]
    fn proportions() {
        let p = vec![paper("a", "2013-01-01", Field::Physics)];
        let mut ms = Vec::new();
        for (class, n) in [(LinkClass::Data, 2), (LinkClass::Methods, 3), (LinkClass::Supplement, 5)] {
            for i in 0..n {
                ms.push(mention("a", &format!("http://x.org/{i}"), class));
            }
        }
        let t = table(p.clone(), ms);
        assert_eq!(class_proportions(&t, 2013, Field::Physics), Some([0.2, 0.3, 0.5]));
        let t = table(p, vec![mention("a", "http://x.org", LinkClass::Supplement)]);
        assert_eq!(class_proportions(&t, 2013, Field::Physics), Some([0.0, 0.0, 1.0]));
        assert_eq!(class_proportions(&t, 2013, Field::Mathematics), None);
    }
}
