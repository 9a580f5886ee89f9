use serde::{Deserialize, Serialize};

use super::{Cell, MentionTable, ProbeMark};
use crate::model::{Field, LinkClass};
use crate::probe::Liveness;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LivenessCell {
    pub year: i32,
    pub probed: u64,
    pub alive: u64,
    pub proportion: Option<f64>,
}

/// Alive fraction among probed mentions; unprobed mentions are ignored.
pub fn alive_proportion(table: &MentionTable, cell: &Cell) -> Option<f64> {
    let (probed, alive) = tally(table, cell);
    (probed > 0).then(|| alive as f64 / probed as f64)
}

fn tally(table: &MentionTable, cell: &Cell) -> (u64, u64) {
    let (mut probed, mut alive) = (0, 0);
    for row in table.select(cell) {
        if let ProbeMark::Probed(l) = row.probe {
            probed += 1;
            alive += u64::from(l == Liveness::Alive);
        }
    }
    (probed, alive)
}

/// One entry per year of the table's span.
pub fn alive_proportion_by_year(table: &MentionTable, field: Field, class: LinkClass) -> Vec<LivenessCell> {
    let Some((lo, hi)) = table.year_span() else {
        return Vec::new();
    };
    (lo..=hi)
        .map(|year| {
            let (probed, alive) = tally(table, &Cell::new(Some(year), Some(field), Some(class)));
            LivenessCell {
                year,
                probed,
                alive,
                proportion: (probed > 0).then(|| alive as f64 / probed as f64),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::super::testutil::*;
    use super::*;

    #[test]
    fn excludes_unprobed() {
        let urls = ["http://a.org", "http://b.org", "http://c.org", "http://d.org", "ftp://e.org"];
        let live = HashMap::from([
            (urls[0].to_string(), Liveness::Alive),
            (urls[1].to_string(), Liveness::Alive),
            (urls[2].to_string(), Liveness::Alive),
            (urls[3].to_string(), Liveness::Problematic),
        ]);
        let t = MentionTable::with_liveness(
            vec![paper("p", "2016-01-01", Field::ComputerScience)],
            urls.iter().map(|u| mention("p", u, LinkClass::Data)).collect(),
            &live,
        )
        .unwrap();
        assert_eq!(alive_proportion(&t, &Cell::default()), Some(0.75));
        let by_year = alive_proportion_by_year(&t, Field::ComputerScience, LinkClass::Data);
        assert_eq!(by_year[0].probed, 4);
        assert_eq!(alive_proportion(&t, &Cell::new(None, None, Some(LinkClass::Methods))), None);
    }
}
