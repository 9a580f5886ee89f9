//! Flat `key = value` configuration.
//!
//! ```text
//! # comment
//! corpus = corpus
//! metadata = metadata.jsonl
//! classifier = external
//! classifier.command = python -m linkclf serve model/
//! probe.domain_wait = 6
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::Datelike;
use linkmine::analytics::{AnalyticsOptions, DomainUnit};
use linkmine::probe::ProbeConfig;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ClassifierMode {
    Lexicon,
    External {
        command: Vec<String>,
        id: String,
        batch_size: usize,
        #[serde(skip)]
        idle_timeout: Duration,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "path", rename_all = "lowercase")]
pub enum TransportMode {
    Http,
    /// Canned responses from a JSON-lines table; no network access.
    Fixture(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub out: PathBuf,
    pub classifier: ClassifierMode,
    pub probe: ProbeConfig,
    pub transport: TransportMode,
    pub analysis_year: i32,
    pub analytics: AnalyticsOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            metadata: None,
            out: PathBuf::from("linkmine-out"),
            classifier: ClassifierMode::Lexicon,
            probe: ProbeConfig::default(),
            transport: TransportMode::Http,
            analysis_year: chrono::Local::now().year(),
            analytics: AnalyticsOptions::default(),
        }
    }
}

/// Parses `key = value` lines; later keys override earlier ones.
pub fn parse_pairs(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn seconds(key: &str, v: &str) -> CliResult<Duration> {
    v.parse::<f64>()
        .ok()
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map(Duration::from_secs_f64)
        .ok_or_else(|| CliError::Usage(format!("{key}: expected seconds, got `{v}`")))
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.parse()
        .map_err(|_| CliError::Usage(format!("{key}: cannot parse `{v}`")))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = PipelineConfig::default();
        cfg.apply(&parse_pairs(&text)?, base)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, pairs: &BTreeMap<String, String>, base: &Path) -> CliResult<()> {
        let path = |v: &str| base.join(v);
        let mut classifier = None;
        let mut command = None;
        let mut id = "external".to_string();
        let mut batch_size = 64;
        let mut idle_timeout = linkmine::classify::DEFAULT_IDLE_TIMEOUT;
        let mut transport = None;
        let mut fixture = None;
        for (k, v) in pairs {
            match k.as_str() {
                "corpus" => self.corpus = Some(path(v)),
                "metadata" => self.metadata = Some(path(v)),
                "out" => self.out = path(v),
                "classifier" => classifier = Some(v.clone()),
                "classifier.command" => {
                    command = Some(shlex::split(v).filter(|c| !c.is_empty()).ok_or_else(|| {
                        CliError::Usage(format!("classifier.command: cannot split `{v}`"))
                    })?)
                }
                "classifier.id" => id = v.clone(),
                "classifier.batch_size" => batch_size = number(k, v)?,
                "classifier.idle_timeout" => idle_timeout = seconds(k, v)?,
                "probe.timeout" => self.probe.timeout = seconds(k, v)?,
                "probe.domain_wait" => self.probe.domain_wait = seconds(k, v)?,
                "probe.max_redirects" => self.probe.max_redirects = number(k, v)?,
                "probe.max_domains" => self.probe.max_concurrent_domains = number(k, v)?,
                "probe.user_agent" => self.probe.user_agent = v.clone(),
                "probe.transport" => transport = Some(v.clone()),
                "probe.fixture" => fixture = Some(path(v)),
                "analysis_year" => self.analysis_year = number(k, v)?,
                "analytics.top_percent" => self.analytics.top_percent = number(k, v)?,
                "analytics.top_k" => self.analytics.top_k = number(k, v)?,
                "analytics.domain_unit" => {
                    self.analytics.domain_unit = match v.as_str() {
                        "registrable" => DomainUnit::Registrable,
                        "host" => DomainUnit::Host,
                        _ => return Err(CliError::Usage(format!("{k}: expected registrable or host"))),
                    }
                }
                "analytics.concentration_years" => {
                    let (lo, hi) = v
                        .split_once('-')
                        .ok_or_else(|| CliError::Usage(format!("{k}: expected `YYYY-YYYY`")))?;
                    let span = (number(k, lo.trim())?, number(k, hi.trim())?);
                    if span.0 > span.1 {
                        return Err(CliError::Usage(format!("{k}: empty year range")));
                    }
                    self.analytics.concentration_years = Some(span);
                }
                other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
            }
        }
        match classifier.as_deref() {
            None if command.is_none() => {}
            Some("lexicon") => self.classifier = ClassifierMode::Lexicon,
            None | Some("external") => {
                let command = command.ok_or_else(|| {
                    CliError::Usage("classifier = external needs classifier.command".into())
                })?;
                self.classifier = ClassifierMode::External {
                    command,
                    id,
                    batch_size: batch_size.max(1),
                    idle_timeout,
                };
            }
            Some(other) => return Err(CliError::Usage(format!("unknown classifier `{other}`"))),
        }
        match (transport.as_deref(), fixture) {
            (None | Some("http"), None) => {}
            (None | Some("fixture"), Some(p)) => self.transport = TransportMode::Fixture(p),
            (Some("fixture"), None) => {
                return Err(CliError::Usage("probe.transport = fixture needs probe.fixture".into()))
            }
            (Some(other), _) => {
                return Err(CliError::Usage(format!("unknown probe.transport `{other}`")))
            }
        }
        if !(self.analytics.top_percent > 0.0 && self.analytics.top_percent <= 100.0) {
            return Err(CliError::Usage("analytics.top_percent must be in (0, 100]".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(text: &str) -> CliResult<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        cfg.apply(&parse_pairs(text)?, Path::new("/base"))?;
        Ok(cfg)
    }

    #[test]
    fn paths_resolve_against_base() {
        let cfg = apply("corpus = c\nmetadata=/abs/m.jsonl\n# note\n").unwrap();
        assert_eq!(cfg.corpus, Some(PathBuf::from("/base/c")));
        assert_eq!(cfg.metadata, Some(PathBuf::from("/abs/m.jsonl")));
    }

    #[test]
    fn external_classifier() {
        let cfg = apply("classifier = external\nclassifier.command = python3 -m clf 'my model'").unwrap();
        let ClassifierMode::External { command, batch_size, .. } = cfg.classifier else {
            panic!("expected external");
        };
        assert_eq!(command, ["python3", "-m", "clf", "my model"]);
        assert_eq!(batch_size, 64);
        assert!(apply("classifier = external").is_err());
    }

    #[test]
    fn probe_settings() {
        let cfg = apply("probe.domain_wait = 0.2\nprobe.max_domains = 3\nprobe.fixture = f.jsonl").unwrap();
        assert_eq!(cfg.probe.domain_wait, Duration::from_millis(200));
        assert_eq!(cfg.probe.max_concurrent_domains, 3);
        assert_eq!(cfg.transport, TransportMode::Fixture(PathBuf::from("/base/f.jsonl")));
    }

    #[test]
    fn bad_input_is_usage_error() {
        for text in ["nonsense", "colour = red", "probe.timeout = -1", "analytics.top_percent = 0"] {
            assert!(matches!(apply(text), Err(CliError::Usage(_))), "{text}");
        }
    }
}
