//! Domain types shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// Primary subject of a paper. Only the three well-represented fields are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[serde(rename = "cs")]
    ComputerScience,
    Physics,
    #[serde(rename = "math")]
    Mathematics,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::ComputerScience, Field::Physics, Field::Mathematics];

    pub fn code(self) -> &'static str {
        match self {
            Field::ComputerScience => "cs",
            Field::Physics => "physics",
            Field::Mathematics => "math",
        }
    }

    /// Parses a metadata field code. Returns `None` for subjects outside the
    /// three retained fields (statistics, q-bio, ...).
    pub fn from_code(code: &str) -> Option<Field> {
        match code.trim().to_ascii_lowercase().as_str() {
            "cs" => Some(Field::ComputerScience),
            "physics" => Some(Field::Physics),
            "math" => Some(Field::Mathematics),
            _ => None,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// The class of a link mention, decided from its context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkClass {
    Data,
    Methods,
    Supplement,
}

impl LinkClass {
    pub const ALL: [LinkClass; 3] = [LinkClass::Data, LinkClass::Methods, LinkClass::Supplement];

    pub fn label(self) -> &'static str {
        match self {
            LinkClass::Data => "data",
            LinkClass::Methods => "methods",
            LinkClass::Supplement => "supplement",
        }
    }

    pub fn index(self) -> usize {
        match self {
            LinkClass::Data => 0,
            LinkClass::Methods => 1,
            LinkClass::Supplement => 2,
        }
    }
}

impl fmt::Display for LinkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LinkClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "data" => Ok(LinkClass::Data),
            "methods" => Ok(LinkClass::Methods),
            "supplement" => Ok(LinkClass::Supplement),
            other => Err(format!("unknown link class `{other}`")),
        }
    }
}

/// One paper's identity and the covariates the regressions need.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperMeta {
    pub paper_id: String,
    pub submit_date: NaiveDate,
    pub field: Field,
    pub citation_count: u64,
}

impl PaperMeta {
    pub fn year(&self) -> i32 {
        self.submit_date.year()
    }

    /// Paper age relative to the year the citation counts were taken.
    pub fn age(&self, analysis_year: i32) -> i32 {
        analysis_year - self.year()
    }
}
