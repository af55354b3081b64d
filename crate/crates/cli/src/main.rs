//! `malsig`: learn behavioral signatures from programs and detect them.
//!
//! Exit codes: 0 success (all benign), 1 input, parse or I/O error,
//! 2 corrupt signature database or miner cap exceeded, 3 at least one
//! file flagged malicious.

mod report;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use malsig_core::{
    extract_scdts, mine, Corpus, ExtractionConfig, FrontendOptions, MinerConfig, MinerError, ProgramModel, Scdt,
    SignatureDb, SupportUnit, ValueMatching,
};

use report::{FileRow, Labels, RunReport};

#[derive(Parser)]
#[command(name = "malsig", version, about = "Behavioral malware signatures from system-call dependency trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine frequent trees from malicious programs into a signature database.
    Learn(LearnArgs),
    /// Check programs against a signature database.
    Detect(DetectArgs),
    /// Print the dependency trees of one program, one per line.
    Extract(ExtractArgs),
    /// Describe a signature database or a program model.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Matching {
    Strict,
    Permissive,
}

impl From<Matching> for ValueMatching {
    fn from(m: Matching) -> Self {
        match m {
            Matching::Strict => ValueMatching::Strict,
            Matching::Permissive => ValueMatching::Permissive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Program,
    Tree,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct LearnArgs {
    /// Minimum support, as a fraction of the corpus.
    #[arg(long, default_value_t = 0.6)]
    support: f64,
    /// Maximum length of a chain of flow edges.
    #[arg(long, default_value_t = 2)]
    height: usize,
    /// Smallest pattern kept in the database.
    #[arg(long, default_value_t = 2)]
    min_nodes: usize,
    /// What support is counted over.
    #[arg(long, value_enum, default_value_t = Unit::Program)]
    support_unit: Unit,
    #[arg(long, value_enum, default_value_t = Matching::Strict)]
    matching: Matching,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Include extraction times in the report.
    #[arg(long)]
    timings: bool,
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long, value_enum, default_value_t = Matching::Permissive)]
    matching: Matching,
    /// Label manifest used to count false positives and negatives.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Include extraction times in the report.
    #[arg(long)]
    timings: bool,
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, default_value_t = 2)]
    height: usize,
    #[arg(long, value_enum, default_value_t = Matching::Strict)]
    matching: Matching,
    file: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InspectArgs {
    #[arg(long)]
    db: Option<PathBuf>,
    /// Dump the pushdown model and API table of a program.
    #[arg(long)]
    program: Option<PathBuf>,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

const EXIT_INPUT: u8 = 1;
const EXIT_DB: u8 = 2;
const EXIT_MALICIOUS: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Learn(a) => learn(a),
        Command::Detect(a) => detect(a),
        Command::Extract(a) => extract(a),
        Command::Inspect(a) => inspect(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("malsig: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load_model(path: &Path) -> Result<ProgramModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    FrontendOptions::default().parse(&path.display().to_string(), &text).with_context(|| path.display().to_string())
}

struct Extracted {
    trees: BTreeSet<Scdt>,
    ms: f64,
}

fn extract_file(path: &Path, cfg: ExtractionConfig) -> Result<Extracted> {
    let model = load_model(path)?;
    let start = Instant::now();
    let trees = extract_scdts(&model, cfg).with_context(|| path.display().to_string())?;
    Ok(Extracted { trees, ms: start.elapsed().as_secs_f64() * 1000.0 })
}

/// Extracts every file in parallel; results keep the input order.
fn extract_all(files: &[PathBuf], cfg: ExtractionConfig) -> Result<Vec<Extracted>> {
    files.par_iter().map(|f| extract_file(f, cfg)).collect::<Vec<_>>().into_iter().collect()
}

fn print_report(r: &RunReport, format: ReportFormat) {
    match format {
        ReportFormat::Text => print!("{}", r.to_text()),
        ReportFormat::Json => print!("{}", r.to_json()),
    }
}

fn learn(a: LearnArgs) -> Result<u8, Failure> {
    if a.files.is_empty() {
        return Err(anyhow!("learn needs at least one program")).exit_with(EXIT_INPUT);
    }
    let cfg = ExtractionConfig::new(a.height, a.matching.into());
    let extracted = extract_all(&a.files, cfg).exit_with(EXIT_INPUT)?;
    let mut corpus = Corpus::new();
    for (f, e) in a.files.iter().zip(&extracted) {
        corpus.push(f.display().to_string(), e.trees.clone());
    }
    let mut mc = MinerConfig::new(a.support);
    mc.unit = match a.support_unit {
        Unit::Program => SupportUnit::Program,
        Unit::Tree => SupportUnit::Tree,
    };
    let mined = match mine(&corpus, &mc) {
        Ok(m) => m,
        Err(e @ MinerError::PatternCap { .. }) => return Err(e).exit_with(EXIT_DB),
        Err(e) => return Err(e).exit_with(EXIT_INPUT),
    };
    let mined = mined.with_min_nodes(a.min_nodes);
    let db = SignatureDb { threshold: a.support, height: a.height, patterns: mined.patterns };
    std::fs::write(&a.out, db.to_text())
        .with_context(|| format!("writing {}", a.out.display()))
        .exit_with(EXIT_INPUT)?;

    let rows = a
        .files
        .iter()
        .zip(&extracted)
        .map(|(f, e)| FileRow {
            file: f.display().to_string(),
            trees: e.trees.len(),
            extract_ms: a.timings.then_some(e.ms),
            verdict: None,
            witness: None,
            label: None,
        })
        .collect();
    let mut report = RunReport::new("learn", rows);
    report.totals.patterns = Some(db.patterns.len());
    print_report(&report, a.report);
    Ok(0)
}

fn detect(a: DetectArgs) -> Result<u8, Failure> {
    if a.files.is_empty() {
        return Err(anyhow!("detect needs at least one program")).exit_with(EXIT_INPUT);
    }
    let text = std::fs::read_to_string(&a.db)
        .with_context(|| format!("reading {}", a.db.display()))
        .exit_with(EXIT_INPUT)?;
    let db = SignatureDb::from_text(&text).with_context(|| a.db.display().to_string()).exit_with(EXIT_DB)?;
    let labels = a.labels.as_deref().map(Labels::load).transpose().exit_with(EXIT_INPUT)?;
    let automaton = db.automaton();
    let cfg = ExtractionConfig::new(db.height, a.matching.into());
    let extracted = extract_all(&a.files, cfg).exit_with(EXIT_INPUT)?;

    let mut rows = Vec::new();
    let (mut malicious, mut fp, mut fneg) = (0, 0, 0);
    for (f, e) in a.files.iter().zip(&extracted) {
        let verdict = automaton.detect(&e.trees);
        let label = labels.as_ref().and_then(|l| l.get(f)).map(str::to_string);
        let flagged = verdict.is_malicious();
        malicious += usize::from(flagged);
        match (label.as_deref(), flagged) {
            (Some("benign"), true) => fp += 1,
            (Some("malicious"), false) => fneg += 1,
            _ => {}
        }
        let witness = match verdict {
            malsig_core::Verdict::Malicious { pattern, .. } => Some(pattern.to_string()),
            malsig_core::Verdict::Benign => None,
        };
        rows.push(FileRow {
            file: f.display().to_string(),
            trees: e.trees.len(),
            extract_ms: a.timings.then_some(e.ms),
            verdict: Some(if flagged { "MALICIOUS" } else { "BENIGN" }),
            witness,
            label,
        });
    }
    let mut report = RunReport::new("detect", rows);
    report.totals.malicious = Some(malicious);
    report.totals.benign = Some(a.files.len() - malicious);
    if labels.is_some() {
        report.totals.false_positives = Some(fp);
        report.totals.false_negatives = Some(fneg);
    }
    print_report(&report, a.report);
    Ok(if malicious > 0 { EXIT_MALICIOUS } else { 0 })
}

fn extract(a: ExtractArgs) -> Result<u8, Failure> {
    let e = extract_file(&a.file, ExtractionConfig::new(a.height, a.matching.into())).exit_with(EXIT_INPUT)?;
    for t in &e.trees {
        println!("{t}");
    }
    Ok(0)
}

fn inspect(a: InspectArgs) -> Result<u8, Failure> {
    if let Some(path) = a.db {
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))
            .exit_with(EXIT_INPUT)?;
        let db = SignatureDb::from_text(&text).with_context(|| path.display().to_string()).exit_with(EXIT_DB)?;
        let h = db.automaton();
        println!("threshold {}", db.threshold);
        println!("height {}", db.height);
        println!("patterns {}", db.patterns.len());
        for p in &db.patterns {
            println!("  {p}  (nodes {}, height {})", p.size(), p.height());
        }
        println!("automaton");
        for (k, v) in h.stats() {
            println!("  {k} {v}");
        }
        print!("{}", h.dump());
    } else if let Some(path) = a.program {
        let m = load_model(&path).exit_with(EXIT_INPUT)?;
        println!("entry {}", m.entry);
        println!("api entry points {}", m.api.len());
        for (p, e) in m.api.iter() {
            let types: Vec<String> = e.params.iter().map(|t| t.to_string()).collect();
            println!("  {p} {} ({})", e.name, types.join(","));
        }
        print!("{}", m.pds.dump());
    }
    Ok(0)
}
