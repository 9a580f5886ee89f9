//! Mining, classifying and probing URL mentions in LaTeX scholarly papers,
//! plus the descriptive analytics and regression models built on them.
//!
//! The pipeline stages map onto modules:
//!
//! - [`ingest`]: metadata records and LaTeX sources into sectioned documents
//! - [`extract`]: URL mentions with context, normalized URLs, registrable domains
//! - [`classify`]: data / methods / supplement labels and classifier evaluation
//! - [`probe`]: polite HTTP liveness checks with a persistent cache
//! - [`analytics`]: usage, reuse, concentration, position and liveness statistics
//! - [`regress`]: logistic liveness and negative binomial citation models

pub mod analytics;
pub mod classify;
pub mod error;
pub mod extract;
pub mod ingest;
pub mod model;
pub mod probe;
pub mod records;
pub mod regress;

pub use error::{Error, Result};
pub use extract::{normalize_url, LinkMention, NormalizedUrl};
pub use ingest::{parse_latex, ParsedDocument};
pub use model::{Field, LinkClass, PaperMeta};
pub use records::MentionRecord;
