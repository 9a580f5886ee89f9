//! Pipeline stages and their runner.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use linkmine::analytics::{build_report, AnalyticsReport, MentionTable};
use linkmine::classify::{classify_records_external, classify_records_lexicon, ExternalSession};
use linkmine::extract::extract_mentions;
use linkmine::ingest::{load_metadata, parse_latex, source_path, ParsedDocument};
use linkmine::probe::{probe_all, FixtureTransport, HttpTransport, ProbeCache, ProbeResult, Transport};
use linkmine::records::{read_jsonl, write_jsonl};
use linkmine::regress::{build_citation_design, build_liveness_design, fit_logistic, fit_negbin, DesignMatrix, RegressionFit};
use linkmine::{normalize_url, MentionRecord, PaperMeta};
use serde::{Deserialize, Serialize};

use crate::config::{ClassifierMode, PipelineConfig, TransportMode};
use crate::error::{CliError, CliResult};
use crate::export;
use crate::store::{hash_file, write_atomic, Fingerprint, Manifest, OutputLock, StageRecord, StageReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum Stage {
    Ingest,
    Extract,
    Classify,
    Probe,
    Analyze,
    Regress,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Extract,
        Stage::Classify,
        Stage::Probe,
        Stage::Analyze,
        Stage::Regress,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Extract => "extract",
            Stage::Classify => "classify",
            Stage::Probe => "probe",
            Stage::Analyze => "analyze",
            Stage::Regress => "regress",
            Stage::Report => "report",
        }
    }

    /// Upstream files this stage reads, with the stage producing each.
    fn needs(self) -> &'static [(&'static str, Stage)] {
        match self {
            Stage::Ingest => &[],
            Stage::Extract => &[(DOCUMENTS, Stage::Ingest)],
            Stage::Classify | Stage::Probe => &[(MENTIONS, Stage::Extract)],
            Stage::Analyze | Stage::Regress => &[
                (PAPERS, Stage::Ingest),
                (CLASSIFIED, Stage::Classify),
                (PROBE_CACHE, Stage::Probe),
            ],
            Stage::Report => &[
                (ANALYTICS, Stage::Analyze),
                (REGRESSION, Stage::Regress),
                (CLASSIFIED, Stage::Classify),
                (PROBE_CACHE, Stage::Probe),
            ],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const PAPERS: &str = "papers.jsonl";
pub const DOCUMENTS: &str = "documents.jsonl";
pub const MENTIONS: &str = "mentions.jsonl";
pub const CLASSIFIED: &str = "classified.jsonl";
pub const PROBE_CACHE: &str = "probe_cache.jsonl";
pub const ANALYTICS: &str = "analytics.json";
pub const REGRESSION: &str = "regression.json";
pub const REPORTS_DIR: &str = "reports";

/// One model of the regression stage: a fit, or why there is none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub rows: usize,
    pub fit: Option<RegressionFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionOutput {
    pub analysis_year: i32,
    pub liveness: ModelOutcome,
    pub citation: ModelOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub skipped: bool,
    pub report: StageReport,
}

impl fmt::Display for StageOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.stage)?;
        if self.skipped {
            write!(f, " unchanged, skipped;")?;
        }
        for (k, v) in &self.report.rows {
            write!(f, " {k}={v}")?;
        }
        if !self.report.warnings.is_empty() {
            write!(f, "; warnings:")?;
            for (k, v) in &self.report.warnings {
                write!(f, " {k}={v}")?;
            }
        }
        Ok(())
    }
}

/// Output names with their bytes; `None` for files the stage wrote itself.
type StageFiles = Vec<(String, Option<Vec<u8>>)>;

pub struct Pipeline {
    cfg: PipelineConfig,
    force: BTreeSet<Stage>,
    manifest: Manifest,
    _lock: OutputLock,
}

fn jsonl_bytes<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, items).expect("writing to memory");
    buf
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = serde_json::to_vec_pretty(value).expect("serializes");
    buf.push(b'\n');
    buf
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str, kind: &str) -> CliResult<&'a PathBuf> {
    let p = p
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("no {kind} given: set `{key}` in the config or pass --{key}")))?;
    if !p.exists() {
        return Err(CliError::Usage(format!("{kind} {} does not exist", p.display())));
    }
    Ok(p)
}

impl Pipeline {
    pub fn open(cfg: PipelineConfig, force: BTreeSet<Stage>) -> CliResult<Self> {
        let lock = OutputLock::acquire(&cfg.out)?;
        let manifest = Manifest::load(&cfg.out)?;
        Ok(Pipeline {
            cfg,
            force,
            manifest,
            _lock: lock,
        })
    }

    pub fn out(&self) -> &Path {
        &self.cfg.out
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    pub fn run_all(&mut self) -> CliResult<Vec<StageOutcome>> {
        Stage::ALL.iter().map(|s| self.run(*s)).collect()
    }

    pub fn run(&mut self, stage: Stage) -> CliResult<StageOutcome> {
        for (file, upstream) in stage.needs() {
            if !self.path(file).is_file() {
                return Err(CliError::Ordering {
                    stage,
                    upstream: *upstream,
                    missing: format!("{file} in {}", self.cfg.out.display()),
                });
            }
        }
        let inputs = self.fingerprint(stage)?;
        if !self.force.contains(&stage) {
            if let Some(rec) = self.manifest.fresh(&self.cfg.out, stage.name(), &inputs) {
                return Ok(StageOutcome {
                    stage,
                    skipped: true,
                    report: rec.report.clone(),
                });
            }
        }
        let (files, report) = match stage {
            Stage::Ingest => self.ingest()?,
            Stage::Extract => self.extract()?,
            Stage::Classify => self.classify()?,
            Stage::Probe => self.probe()?,
            Stage::Analyze => self.analyze()?,
            Stage::Regress => self.regress()?,
            Stage::Report => self.report()?,
        };
        let mut outputs = BTreeMap::new();
        for (name, bytes) in files {
            let path = self.path(&name);
            if let Some(bytes) = bytes {
                write_atomic(&path, &bytes)?;
            }
            outputs.insert(name, hash_file(&path)?);
        }
        self.manifest.stages.insert(
            stage.name().to_string(),
            StageRecord {
                inputs,
                outputs,
                report: report.clone(),
            },
        );
        self.manifest.save(&self.cfg.out)?;
        Ok(StageOutcome {
            stage,
            skipped: false,
            report,
        })
    }

    fn fingerprint(&self, stage: Stage) -> CliResult<String> {
        let mut fp = Fingerprint::default();
        fp.add("stage", stage.name());
        for (file, _) in stage.needs() {
            fp.add_file(file, &self.path(file))?;
        }
        let cfg = &self.cfg;
        match stage {
            Stage::Ingest => {
                let metadata = required(&cfg.metadata, "metadata", "metadata file")?;
                let corpus = required(&cfg.corpus, "corpus", "corpus directory")?;
                fp.add_file("metadata", metadata)?;
                for path in corpus_sources(corpus)? {
                    let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
                    fp.add_file(&name, &path)?;
                }
            }
            Stage::Classify => {
                fp.add("classifier", &serde_json::to_string(&cfg.classifier).expect("serializes"));
            }
            Stage::Probe => {
                fp.add("probe", &format!("{:?}", cfg.probe));
                fp.add("transport", &serde_json::to_string(&cfg.transport).expect("serializes"));
                if let TransportMode::Fixture(p) = &cfg.transport {
                    fp.add_file("fixture", p)?;
                }
            }
            Stage::Analyze => {
                fp.add("options", &serde_json::to_string(&cfg.analytics).expect("serializes"));
            }
            Stage::Regress => fp.add("analysis_year", &cfg.analysis_year.to_string()),
            Stage::Extract | Stage::Report => {}
        }
        Ok(fp.finish())
    }

    fn ingest(&self) -> CliResult<(StageFiles, StageReport)> {
        let metadata = required(&self.cfg.metadata, "metadata", "metadata file")?;
        let corpus = required(&self.cfg.corpus, "corpus", "corpus directory")?;
        let loaded = load_metadata(metadata)?;
        let mut report = StageReport::default();
        report.warn("unsupported_field", loaded.dropped);
        let mut papers = loaded.papers;
        papers.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        let mut kept = Vec::new();
        let mut docs = Vec::new();
        let mut missing = 0;
        let mut parse_warnings = 0;
        for p in papers {
            let path = source_path(corpus, &p.paper_id);
            let bytes = match fs::read(&path) {
                Ok(b) => b,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    missing += 1;
                    continue;
                }
                Err(e) => return Err(CliError::io(&path, e)),
            };
            let doc = parse_latex(&String::from_utf8_lossy(&bytes), &p.paper_id);
            parse_warnings += doc.warnings.len();
            docs.push(doc);
            kept.push(p);
        }
        report.warn("missing_source", missing);
        report.warn("latex", parse_warnings);
        report.row("papers", kept.len());
        report.row("paragraphs", docs.iter().map(|d| d.paragraph_count).sum());
        Ok((
            vec![
                (PAPERS.into(), Some(jsonl_bytes(&kept))),
                (DOCUMENTS.into(), Some(jsonl_bytes(&docs))),
            ],
            report,
        ))
    }

    fn extract(&self) -> CliResult<(StageFiles, StageReport)> {
        let docs: Vec<ParsedDocument> = read_jsonl(&self.path(DOCUMENTS))?;
        let mut records = Vec::new();
        let mut rejected = 0;
        for doc in &docs {
            let ex = extract_mentions(doc);
            rejected += ex.rejected;
            records.extend(ex.mentions.iter().map(|m| m.to_record()));
        }
        let mut report = StageReport::default();
        report.row("mentions", records.len());
        report.row(
            "unique_urls",
            records.iter().map(|r| r.canonical.as_str()).collect::<HashSet<_>>().len(),
        );
        report.warn("rejected_urls", rejected);
        Ok((vec![(MENTIONS.into(), Some(jsonl_bytes(&records)))], report))
    }

    fn classify(&self) -> CliResult<(StageFiles, StageReport)> {
        let mut records: Vec<MentionRecord> = read_jsonl(&self.path(MENTIONS))?;
        let mut report = StageReport::default();
        match &self.cfg.classifier {
            ClassifierMode::Lexicon => classify_records_lexicon(&mut records),
            ClassifierMode::External {
                command,
                id,
                batch_size,
                idle_timeout,
            } => {
                let mut session = ExternalSession::start(command, *idle_timeout)?;
                let fallbacks = classify_records_external(&mut records, &mut session, id, *batch_size);
                report.warn("classifier_fallbacks", fallbacks);
            }
        }
        report.row("mentions", records.len());
        for class in linkmine::LinkClass::ALL {
            report.row(class.label(), records.iter().filter(|r| r.class == Some(class)).count());
        }
        Ok((vec![(CLASSIFIED.into(), Some(jsonl_bytes(&records)))], report))
    }

    fn probe(&self) -> CliResult<(StageFiles, StageReport)> {
        let records: Vec<MentionRecord> = read_jsonl(&self.path(MENTIONS))?;
        let mut report = StageReport::default();
        let mut urls = Vec::new();
        let mut bad = 0;
        for r in &records {
            match normalize_url(&r.canonical) {
                Ok(u) => urls.push(u),
                Err(_) => bad += 1,
            }
        }
        report.warn("unnormalizable", bad);
        let transport: Box<dyn Transport> = match &self.cfg.transport {
            TransportMode::Http => Box::new(HttpTransport::new(&self.cfg.probe)?),
            TransportMode::Fixture(p) => Box::new(FixtureTransport::load(p)?),
        };
        let mut cache = ProbeCache::open(&self.path(PROBE_CACHE))?;
        let force = self.force.contains(&Stage::Probe);
        let run = probe_all(&urls, &self.cfg.probe, transport.as_ref(), &mut cache, force)?;
        report.row("urls", run.results.len());
        report.row("probed", run.probed);
        report.row("from_cache", run.from_cache);
        report.row("alive", run.results.iter().filter(|r| r.alive).count());
        report.warn("unprobeable", run.unprobeable.len());
        Ok((vec![(PROBE_CACHE.into(), None)], report))
    }

    fn table(&self) -> CliResult<(MentionTable, HashMap<String, ProbeResult>)> {
        let papers: Vec<PaperMeta> = read_jsonl(&self.path(PAPERS))?;
        let records: Vec<MentionRecord> = read_jsonl(&self.path(CLASSIFIED))?;
        let probes = load_probes(&self.path(PROBE_CACHE))?;
        Ok((MentionTable::new(papers, records, &probes)?, probes))
    }

    fn analyze(&self) -> CliResult<(StageFiles, StageReport)> {
        let (table, _) = self.table()?;
        let analytics = build_report(&table, &self.cfg.analytics);
        let mut report = StageReport::default();
        report.row("papers", table.papers().len());
        report.row("mentions", table.rows().len());
        Ok((vec![(ANALYTICS.into(), Some(json_bytes(&analytics)))], report))
    }

    fn regress(&self) -> CliResult<(StageFiles, StageReport)> {
        let (table, _) = self.table()?;
        let year = self.cfg.analysis_year;
        if let Some(max) = table.papers().iter().map(PaperMeta::year).max() {
            if year < max {
                return Err(CliError::Data(format!(
                    "analysis_year {year} is before the latest submit year {max}"
                )));
            }
        }
        let fit = |design: linkmine::Result<DesignMatrix>, f: fn(&DesignMatrix) -> linkmine::Result<RegressionFit>| {
            match design {
                Err(e) => ModelOutcome { rows: 0, fit: None, error: Some(e.to_string()) },
                Ok(d) => {
                    let rows = d.n_rows();
                    match f(&d) {
                        Ok(fit) => ModelOutcome { rows, fit: Some(fit), error: None },
                        Err(e) => ModelOutcome { rows, fit: None, error: Some(e.to_string()) },
                    }
                }
            }
        };
        let out = RegressionOutput {
            analysis_year: year,
            liveness: fit(build_liveness_design(&table, year), fit_logistic),
            citation: fit(build_citation_design(&table, year), fit_negbin),
        };
        let mut report = StageReport::default();
        for (name, m) in [("liveness", &out.liveness), ("citation", &out.citation)] {
            report.row(&format!("{name}_rows"), m.rows);
            report.warn(&format!("{name}_failed"), usize::from(m.fit.is_none()));
            report.warn(
                &format!("{name}_diagnostic"),
                usize::from(m.fit.as_ref().is_some_and(|f| f.diagnostic.is_some())),
            );
        }
        Ok((vec![(REGRESSION.into(), Some(json_bytes(&out)))], report))
    }

    fn report(&self) -> CliResult<(StageFiles, StageReport)> {
        let analytics: AnalyticsReport = read_json(&self.path(ANALYTICS))?;
        let regression: RegressionOutput = read_json(&self.path(REGRESSION))?;
        let records: Vec<MentionRecord> = read_jsonl(&self.path(CLASSIFIED))?;
        let probes = load_probes(&self.path(PROBE_CACHE))?;
        let canon: BTreeSet<&str> = records.iter().map(|r| r.canonical.as_str()).collect();
        let results: Vec<&ProbeResult> = canon.iter().filter_map(|c| probes.get(*c)).collect();
        let files = export::all_reports(&analytics, &regression, &results);
        let mut report = StageReport::default();
        report.row("files", files.len());
        Ok((
            files
                .into_iter()
                .map(|(name, bytes)| (format!("{REPORTS_DIR}/{name}"), Some(bytes)))
                .collect(),
            report,
        ))
    }
}

fn load_probes(path: &Path) -> CliResult<HashMap<String, ProbeResult>> {
    let cache = ProbeCache::open(path)?;
    Ok(cache
        .results()
        .into_iter()
        .map(|r| (r.canonical.clone(), r.clone()))
        .collect())
}

fn corpus_sources(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tex"))
        .collect();
    out.sort();
    Ok(out)
}
