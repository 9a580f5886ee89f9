use serde::{Deserialize, Serialize};

use super::{Cell, MentionTable};
use crate::model::{Field, LinkClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub year: i32,
    pub counts: [u64; 10],
    /// `counts` normalized to sum to 1; all zeros when `empty`.
    pub probs: [f64; 10],
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionHeatmap {
    pub field: Field,
    pub class: LinkClass,
    /// One row per year of the table's span.
    pub rows: Vec<HeatmapRow>,
}

/// Distribution of mentions over positional deciles, per submit year.
pub fn position_heatmap(table: &MentionTable, field: Field, class: LinkClass) -> PositionHeatmap {
    let mut rows = Vec::new();
    if let Some((lo, hi)) = table.year_span() {
        for year in lo..=hi {
            let mut counts = [0u64; 10];
            for row in table.select(&Cell::new(Some(year), Some(field), Some(class))) {
                counts[row.mention.decile()] += 1;
            }
            let total: u64 = counts.iter().sum();
            let probs = if total == 0 {
                [0.0; 10]
            } else {
                counts.map(|c| c as f64 / total as f64)
            };
            rows.push(HeatmapRow {
                year,
                counts,
                probs,
                empty: total == 0,
            });
        }
    }
    PositionHeatmap { field, class, rows }
}
