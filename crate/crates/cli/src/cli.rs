//! Argument parsing and dispatch.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::echo;
use crate::error::{CliError, CliResult};
use crate::stage::{Pipeline, Stage, StageOutcome};

#[derive(Debug, Parser)]
#[command(name = "linkmine", version, about = "Mine, classify, probe and analyze URL mentions in LaTeX papers")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (intermediate files, manifest, reports).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Directory holding `<paper_id>.tex` files.
    #[arg(long, global = true, value_name = "DIR")]
    corpus: Option<PathBuf>,

    /// Line-delimited paper metadata.
    #[arg(long, global = true, value_name = "PATH")]
    metadata: Option<PathBuf>,

    /// Year the citation counts refer to.
    #[arg(long, global = true)]
    analysis_year: Option<i32>,

    /// Re-run a stage even when its inputs are unchanged (`all` for every
    /// stage; bare `--force` means the stage being run). A forced probe
    /// ignores cached results.
    #[arg(long, global = true, value_name = "STAGE", num_args = 0..=1, default_missing_value = "")]
    force: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Default, Args)]
struct ProbeArgs {
    /// Per-request timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Seconds between requests to the same registrable domain.
    #[arg(long)]
    domain_wait: Option<f64>,
    #[arg(long)]
    max_redirects: Option<usize>,
    /// Domains probed concurrently.
    #[arg(long)]
    max_domains: Option<usize>,
    #[arg(long)]
    user_agent: Option<String>,
    /// Answer requests from a JSON-lines response table instead of the network.
    #[arg(long, value_name = "PATH")]
    fixture: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read metadata and parse LaTeX sources.
    Ingest,
    /// Detect and normalize URL mentions.
    Extract,
    /// Label mentions as data, methods or supplement.
    Classify,
    /// Check whether each unique URL is alive.
    Probe(ProbeArgs),
    /// Compute descriptive statistics.
    Analyze,
    /// Fit the liveness and citation models.
    Regress,
    /// Write CSV exports.
    Report,
    /// Run every stage in order.
    All(ProbeArgs),
    /// Serve the classifier protocol on stdin/stdout using the lexicon.
    #[command(hide = true)]
    EchoClassifier {
        /// Answer this request id with an invalid label.
        #[arg(long)]
        garble: Vec<String>,
    },
}

fn build_config(cli: &Cli, probe: Option<&ProbeArgs>) -> CliResult<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let cwd = std::path::Path::new(".");
    let mut pairs = BTreeMap::new();
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v);
        }
    };
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.to_string_lossy().into_owned());
    set("out", path(&cli.out));
    set("corpus", path(&cli.corpus));
    set("metadata", path(&cli.metadata));
    set("analysis_year", cli.analysis_year.map(|y| y.to_string()));
    if let Some(p) = probe {
        set("probe.timeout", p.timeout.map(|v| v.to_string()));
        set("probe.domain_wait", p.domain_wait.map(|v| v.to_string()));
        set("probe.max_redirects", p.max_redirects.map(|v| v.to_string()));
        set("probe.max_domains", p.max_domains.map(|v| v.to_string()));
        set("probe.user_agent", p.user_agent.clone());
        set("probe.fixture", path(&p.fixture));
    }
    cfg.apply(&pairs, cwd)?;
    Ok(cfg)
}

fn force_set(values: &[String], current: &[Stage]) -> CliResult<BTreeSet<Stage>> {
    let mut out = BTreeSet::new();
    for v in values {
        match v.as_str() {
            "" => out.extend(current),
            "all" => out.extend(Stage::ALL),
            name => {
                let stage = Stage::ALL
                    .into_iter()
                    .find(|s| s.name() == name)
                    .ok_or_else(|| CliError::Usage(format!("--force: unknown stage `{name}`")))?;
                out.insert(stage);
            }
        }
    }
    Ok(out)
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let (stages, probe): (Vec<Stage>, Option<&ProbeArgs>) = match &cli.command {
        Command::Ingest => (vec![Stage::Ingest], None),
        Command::Extract => (vec![Stage::Extract], None),
        Command::Classify => (vec![Stage::Classify], None),
        Command::Probe(p) => (vec![Stage::Probe], Some(p)),
        Command::Analyze => (vec![Stage::Analyze], None),
        Command::Regress => (vec![Stage::Regress], None),
        Command::Report => (vec![Stage::Report], None),
        Command::All(p) => (Stage::ALL.to_vec(), Some(p)),
        Command::EchoClassifier { garble } => {
            let garble: HashSet<String> = garble.iter().cloned().collect();
            let stdin = io::stdin();
            return echo::serve(stdin.lock(), io::stdout().lock(), &garble)
                .map_err(|e| CliError::Data(format!("echo classifier: {e}")));
        }
    };
    let cfg = build_config(&cli, probe)?;
    let force = force_set(&cli.force, &stages)?;
    let mut pipeline = Pipeline::open(cfg, force)?;
    for stage in stages {
        let outcome: StageOutcome = pipeline.run(stage)?;
        let _ = writeln!(stdout, "{outcome}");
    }
    Ok(())
}

/// Runs the command line; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
