use std::collections::HashMap;

use super::DesignMatrix;
use crate::analytics::{MentionTable, ProbeMark};
use crate::error::{Error, Result};
use crate::model::{Field, LinkClass, PaperMeta};
use crate::probe::Liveness;

/// Liveness model columns; baselines are math and supplement.
pub const LIVENESS_COLUMNS: [&str; 11] = [
    "intercept",
    "log2_domain_count",
    "log2_url_count",
    "log2_citations",
    "in_footnote",
    "field_cs",
    "field_physics",
    "class_methods",
    "class_data",
    "age",
    "age_sq",
];

/// Citation model columns; the baseline is computer science.
pub const CITATION_COLUMNS: [&str; 9] = [
    "intercept",
    "live_methods",
    "live_data",
    "problematic_methods",
    "problematic_data",
    "field_math",
    "field_physics",
    "age",
    "age_sq",
];

fn names(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn age(paper: &PaperMeta, analysis_year: i32) -> Result<f64> {
    let age = paper.age(analysis_year);
    if age < 0 {
        return Err(Error::Invalid(format!(
            "analysis year {analysis_year} precedes the submit year of {}",
            paper.paper_id
        )));
    }
    Ok(age as f64)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// One row per probed mention; the response is 1 for alive links.
pub fn build_liveness_design(table: &MentionTable, analysis_year: i32) -> Result<DesignMatrix> {
    let mut domain_counts: HashMap<&str, u64> = HashMap::new();
    let mut url_counts: HashMap<&str, u64> = HashMap::new();
    for row in table.rows() {
        *domain_counts.entry(&row.mention.domain).or_default() += 1;
        *url_counts.entry(&row.mention.canonical).or_default() += 1;
    }
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for row in table.rows() {
        let ProbeMark::Probed(liveness) = row.probe else {
            continue;
        };
        let paper = table.paper_of(row);
        let a = age(paper, analysis_year)?;
        rows.push(vec![
            1.0,
            (domain_counts[row.mention.domain.as_str()] as f64).log2(),
            (url_counts[row.mention.canonical.as_str()] as f64).log2(),
            (1.0 + paper.citation_count as f64).log2(),
            flag(row.mention.in_footnote),
            flag(paper.field == Field::ComputerScience),
            flag(paper.field == Field::Physics),
            flag(row.class == LinkClass::Methods),
            flag(row.class == LinkClass::Data),
            a,
            a * a,
        ]);
        y.push(flag(liveness == Liveness::Alive));
    }
    DesignMatrix::new(names(&LIVENESS_COLUMNS), &rows, y)
}

/// One row per paper; the response is its citation count.
pub fn build_citation_design(table: &MentionTable, analysis_year: i32) -> Result<DesignMatrix> {
    // live methods, live data, problematic methods, problematic data
    let mut flags = vec![[false; 4]; table.papers().len()];
    for row in table.rows() {
        let ProbeMark::Probed(liveness) = row.probe else {
            continue;
        };
        let slot = match (liveness, row.class) {
            (Liveness::Alive, LinkClass::Methods) => 0,
            (Liveness::Alive, LinkClass::Data) => 1,
            (Liveness::Problematic, LinkClass::Methods) => 2,
            (Liveness::Problematic, LinkClass::Data) => 3,
            (_, LinkClass::Supplement) => continue,
        };
        flags[row.paper][slot] = true;
    }
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (paper, f) in table.papers().iter().zip(&flags) {
        let a = age(paper, analysis_year)?;
        rows.push(vec![
            1.0,
            flag(f[0]),
            flag(f[1]),
            flag(f[2]),
            flag(f[3]),
            flag(paper.field == Field::Mathematics),
            flag(paper.field == Field::Physics),
            a,
            a * a,
        ]);
        y.push(paper.citation_count as f64);
    }
    DesignMatrix::new(names(&CITATION_COLUMNS), &rows, y)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use chrono::NaiveDate;

    use super::*;
    use crate::records::MentionRecord;

    fn paper(id: &str, year: i32, field: Field, cites: u64) -> PaperMeta {
        PaperMeta {
            paper_id: id.into(),
            submit_date: NaiveDate::from_ymd_opt(year, 1, 1).unwrap(),
            field,
            citation_count: cites,
        }
    }

    fn mention(paper: &str, canonical: &str, domain: &str, class: LinkClass, footnote: bool) -> MentionRecord {
        MentionRecord {
            paper_id: paper.into(),
            url_raw: canonical.into(),
            canonical: canonical.into(),
            domain: domain.into(),
            class: Some(class),
            confidence: None,
            classifier_id: None,
            section: String::new(),
            paragraph_index: 0,
            paragraph_count: 1,
            in_footnote: footnote,
            context_sentence: String::new(),
        }
    }

    #[test]
    fn liveness_rows() {
        let papers = vec![paper("a", 2018, Field::Mathematics, 3), paper("b", 2020, Field::Physics, 0)];
        let mut ms: Vec<MentionRecord> = (0..8)
            .map(|i| mention("a", &format!("http://g.org/{}", i % 2), "g.org", LinkClass::Supplement, false))
            .collect();
        ms.push(mention("b", "http://h.org", "h.org", LinkClass::Data, true));
        ms.push(mention("b", "ftp://h.org/f", "h.org", LinkClass::Data, false));
        let mut live = HashMap::from([
            ("http://g.org/0".to_string(), Liveness::Alive),
            ("http://g.org/1".to_string(), Liveness::Problematic),
        ]);
        live.insert("http://h.org".into(), Liveness::Alive);
        let t = MentionTable::with_liveness(papers, ms, &live).unwrap();
        let d = build_liveness_design(&t, 2022).unwrap();
        assert_eq!(d.n_rows(), 9);
        assert_eq!(d.row(0), vec![1.0, 3.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 4.0, 16.0]);
        assert_eq!(d.row(8), vec![1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 2.0, 4.0]);
        assert_eq!(d.y[0], 1.0);
        assert_eq!(d.y[1], 0.0);
    }

    #[test]
    fn citation_indicators_independent() {
        let papers = vec![paper("a", 2015, Field::ComputerScience, 10), paper("b", 2016, Field::Mathematics, 2)];
        let ms = vec![
            mention("a", "http://d.org/1", "d.org", LinkClass::Data, false),
            mention("a", "http://d.org/2", "d.org", LinkClass::Data, false),
            mention("b", "http://m.org", "m.org", LinkClass::Methods, false),
        ];
        let live = HashMap::from([
            ("http://d.org/1".to_string(), Liveness::Alive),
            ("http://d.org/2".to_string(), Liveness::Problematic),
            ("http://m.org".to_string(), Liveness::Alive),
        ]);
        let t = MentionTable::with_liveness(papers, ms, &live).unwrap();
        let d = build_citation_design(&t, 2022).unwrap();
        assert_eq!(d.row(0), vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 7.0, 49.0]);
        assert_eq!(d.row(1), vec![1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 6.0, 36.0]);
        assert_eq!(d.y.as_slice(), &[10.0, 2.0]);
        assert!(build_citation_design(&t, 2010).is_err());
    }

    #[test]
    fn no_probed_mentions_is_empty_design() {
        let t = MentionTable::with_liveness(vec![paper("a", 2015, Field::Physics, 1)], vec![], &HashMap::new()).unwrap();
        assert!(matches!(build_liveness_design(&t, 2022), Err(Error::EmptyDesign)));
    }
}
