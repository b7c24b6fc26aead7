use std::fs;
use std::io::{self, BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use webnav::comparison_file::validate_reader;
use webnav::corpus::load_corpus;
use webnav::live::{LiveBackend, LiveConfig};
use webnav::policy::{run_episode, PolicyKind};
use webnav::records::{first_line_difference, parse_records, replay_config, to_json};
use webnav::scores::{curve, read_scores, write_csv, write_table};
use webnav::service::{serve, AppState, BackendChoice, SharedBackend};
use webnav_core::questions::{preprocess_question, RawQuestion};
use webnav_core::{replay, Divergence, EndReason, EnvConfig, FetchedContent, WebBackend};

/// Text-based web-browsing environment tools.
#[derive(Parser)]
#[command(name = "webnav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scripted-policy episode and print its record.
    Run(RunArgs),
    /// Re-run recorded episodes and check every observation byte-for-byte.
    Replay(ReplayArgs),
    /// Print the simplified text of an HTML file or URL.
    Simplify(SimplifyArgs),
    /// Post-process questions from a JSON Lines file.
    Preprocess(PreprocessArgs),
    /// Check a comparison dataset file.
    Validate(ValidateArgs),
    /// Best-of-n estimates averaged over questions from a score file.
    BonCurve(BonCurveArgs),
    /// Serve the session API.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Offline,
    Live,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyName {
    Heuristic,
    Random,
}

#[derive(Args)]
struct BackendArgs {
    #[arg(long, value_enum, default_value = "offline")]
    backend: BackendKind,
    /// Offline corpus directory (with corpus.json).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Search endpoint for the live backend.
    #[arg(long, env = "WEBNAV_SEARCH_ENDPOINT")]
    search_endpoint: Option<String>,
}

#[derive(Args)]
struct EnvArgs {
    #[arg(long)]
    max_actions: Option<usize>,
    #[arg(long)]
    max_quote_tokens: Option<usize>,
    #[arg(long)]
    viewport_lines: Option<usize>,
    #[arg(long)]
    search_result_count: Option<usize>,
    #[arg(long)]
    max_observation_chars: Option<usize>,
}

impl EnvArgs {
    fn config(&self) -> EnvConfig {
        let mut c = EnvConfig::default();
        c.max_actions = self.max_actions.unwrap_or(c.max_actions);
        c.max_quote_tokens = self.max_quote_tokens.unwrap_or(c.max_quote_tokens);
        c.viewport_lines = self.viewport_lines.unwrap_or(c.viewport_lines);
        c.search_result_count = self.search_result_count.unwrap_or(c.search_result_count);
        c.max_observation_chars = self.max_observation_chars;
        c
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    question: String,
    #[arg(long, value_enum, default_value = "heuristic")]
    policy: PolicyName,
    /// Seed for the random policy.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    env: EnvArgs,
}

#[derive(Args)]
struct ReplayArgs {
    /// A record file: one JSON document or JSON Lines.
    record: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    env: EnvArgs,
}

#[derive(Args)]
struct SimplifyArgs {
    /// A local file or an http(s) URL.
    input: String,
    /// URL used to resolve relative links of a local file.
    #[arg(long)]
    url: Option<String>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// JSON Lines of {title, selftext?, source_dataset?, id?}.
    questions: PathBuf,
    /// Emit {"id", "question"} JSON Lines instead of plain text lines.
    #[arg(long)]
    jsonl: bool,
}

#[derive(Args)]
struct ValidateArgs {
    comparisons: PathBuf,
}

#[derive(Args)]
struct BonCurveArgs {
    /// JSON Lines of {question_id, answer_id, train_score, val_score}.
    scores: PathBuf,
    /// Comma-separated sample counts.
    #[arg(long = "n", value_delimiter = ',', required = true)]
    n_values: Vec<usize>,
    /// Also write the table as CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Append finished episode records here (JSON Lines).
    #[arg(long)]
    record_log: Option<PathBuf>,
    /// Idle sessions are dropped after this many seconds.
    #[arg(long, default_value_t = 7200)]
    ttl_secs: u64,
}

/// A failure caused by how the command was invoked.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn backend(args: &BackendArgs) -> anyhow::Result<SharedBackend> {
    match args.backend {
        BackendKind::Offline => {
            let dir = args
                .corpus
                .as_deref()
                .ok_or_else(|| UsageError("the offline backend needs --corpus <dir>".into()))?;
            Ok(Arc::new(load_corpus(dir)?))
        }
        BackendKind::Live => {
            let endpoint = args
                .search_endpoint
                .clone()
                .ok_or_else(|| UsageError("the live backend needs --search-endpoint <url>".into()))?;
            Ok(Arc::new(LiveBackend::new(LiveConfig::from_env(endpoint))?))
        }
    }
}

fn cmd_run(args: RunArgs) -> anyhow::Result<bool> {
    let backend = backend(&args.backend)?;
    let kind = match args.policy {
        PolicyName::Heuristic => PolicyKind::Heuristic,
        PolicyName::Random => PolicyKind::Random { seed: args.seed },
    };
    let mut policy = kind.build();
    let record = run_episode(&args.question, policy.as_mut(), &backend, args.env.config())?;
    io::stdout().write_all(to_json(&record).as_bytes())?;
    if record.end_reason != Some(EndReason::Answered) {
        let reason = record.end_reason.map_or("unfinished", |r| r.as_str());
        eprintln!("episode ended without an answer: {reason}");
        return Ok(false);
    }
    Ok(true)
}

fn cmd_replay(args: ReplayArgs) -> anyhow::Result<bool> {
    let text = fs::read_to_string(&args.record).with_context(|| format!("cannot read {}", args.record.display()))?;
    let records = parse_records(&text)?;
    let backend = backend(&args.backend)?;
    let base = args.env.config();
    let mut out = io::stdout().lock();
    let mut all_ok = true;
    for (i, record) in records.iter().enumerate() {
        match replay(record, replay_config(record, &base), &backend)? {
            Ok(_) => writeln!(out, "record {i}: ok ({} steps)", record.steps.len())?,
            Err(divergence) => {
                all_ok = false;
                match divergence {
                    Divergence::Observation { step, expected, actual } => {
                        let (line, e, a) = first_line_difference(&expected, &actual);
                        writeln!(out, "record {i}: observation differs at step {step}, line {line}")?;
                        writeln!(out, "  expected: {e}")?;
                        writeln!(out, "  actual:   {a}")?;
                    }
                    Divergence::EndedEarly { step } => {
                        writeln!(out, "record {i}: episode ended before step {step}")?
                    }
                    Divergence::Quotes => writeln!(out, "record {i}: collected quotes differ")?,
                    Divergence::Outcome { expected, actual } => writeln!(
                        out,
                        "record {i}: end reason differs: expected {}, got {}",
                        expected.map_or("none", |r| r.as_str()),
                        actual.map_or("none", |r| r.as_str())
                    )?,
                }
            }
        }
    }
    Ok(all_ok)
}

fn mime_for(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("txt" | "text" | "md") => "text/plain",
        Some("pdf") => "application/pdf",
        _ => "text/html",
    }
}

fn cmd_simplify(args: SimplifyArgs) -> anyhow::Result<bool> {
    let page = if args.input.starts_with("http://") || args.input.starts_with("https://") {
        let live = LiveBackend::new(LiveConfig::from_env(""))?;
        let content = live.fetch_content(&args.input).map_err(|e| anyhow!("cannot fetch {}: {e}", args.input))?;
        content.into_page(args.url.as_deref().unwrap_or(&args.input))
    } else {
        let path = Path::new(&args.input);
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        let url = args.url.clone().unwrap_or_else(|| format!("file://{}", path.display()));
        FetchedContent::from_mime(mime_for(path), bytes).into_page(&url)
    };
    let mut out = io::stdout().lock();
    writeln!(out, "{}\n", page.title_line)?;
    writeln!(out, "{}", page.text())?;
    Ok(true)
}

fn cmd_preprocess(args: PreprocessArgs) -> anyhow::Result<bool> {
    let text = fs::read_to_string(&args.questions).with_context(|| format!("cannot read {}", args.questions.display()))?;
    let mut out = io::stdout().lock();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawQuestion = serde_json::from_str(line).with_context(|| format!("line {}", i + 1))?;
        let Some(question) = preprocess_question(&raw) else {
            continue;
        };
        if args.jsonl {
            serde_json::to_writer(&mut out, &serde_json::json!({"id": raw.id, "question": question}))?;
            writeln!(out)?;
        } else {
            // One question per line; embedded newlines are escaped.
            writeln!(out, "{}", question.replace('\n', "\\n"))?;
        }
    }
    Ok(true)
}

fn cmd_validate(args: ValidateArgs) -> anyhow::Result<bool> {
    let file = fs::File::open(&args.comparisons).with_context(|| format!("cannot read {}", args.comparisons.display()))?;
    let report = validate_reader(BufReader::new(file))?;
    let mut out = io::stdout().lock();
    writeln!(out, "pairs: {}", report.pairs)?;
    writeln!(out, "valid: {}", report.valid)?;
    writeln!(out, "ties: {}", report.ties)?;
    writeln!(out, "{} violations", report.violations.len())?;
    for (line, v) in &report.violations {
        writeln!(out, "line {line}: {v}")?;
    }
    Ok(report.is_clean())
}

fn cmd_bon_curve(args: BonCurveArgs) -> anyhow::Result<bool> {
    let file = fs::File::open(&args.scores).with_context(|| format!("cannot read {}", args.scores.display()))?;
    let table = read_scores(BufReader::new(file))?;
    let rows = curve(&table, &args.n_values)?;
    write_table(io::stdout().lock(), &rows)?;
    if let Some(path) = &args.csv {
        write_csv(fs::File::create(path)?, &rows)?;
    }
    Ok(true)
}

fn cmd_serve(args: ServeArgs) -> anyhow::Result<bool> {
    let choice = match args.backend.backend {
        BackendKind::Offline => BackendChoice::Offline,
        BackendKind::Live => BackendChoice::Live,
    };
    let config = args.env.config();
    config.validate()?;
    let mut app = AppState::new(choice, backend(&args.backend)?, config).with_ttl(Duration::from_secs(args.ttl_secs));
    if let Some(path) = &args.record_log {
        app = app.with_record_log(path)?;
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(serve(Arc::new(app), SocketAddr::new(args.host, args.port)))?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Simplify(a) => cmd_simplify(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Validate(a) => cmd_validate(a),
        Command::BonCurve(a) => cmd_bon_curve(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
