use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use xpath_agent::condenser::condense;
use xpath_agent::corpus::convert_swde;
use xpath_agent::dom::{parse_html, serialize};
use xpath_agent::pipeline::{bench, load_config, load_task, run_task, PipelineConfig, PipelineError};
use xpath_agent::sanitizer::{sanitize_and_minify, token_stats, PageInput};
use xpath_agent::xpath::{parse_xpath, result_strings, XPathContext, XPathResult};

#[derive(Parser)]
#[command(name = "xpath-agent", version, about = "Synthesize reusable XPaths from a few seed pages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one task end to end
    Run {
        task: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every task of a corpus and print a summary table
    Bench {
        corpus: PathBuf,
        config: PathBuf,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sanitize and minify one page
    Sanitize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print the size report as JSON on stderr
        #[arg(long)]
        report: bool,
    },
    /// Condense a page around target texts (JSON list of strings)
    Condense {
        input: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Size statistics for a directory of pages, grouped by subdirectory
    Stats {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write scatter data to plot.json
        #[arg(long)]
        plot: bool,
    },
    /// XPath utilities
    Xpath {
        #[command(subcommand)]
        command: XpathCommand,
    },
    /// Corpus utilities
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum XpathCommand {
    /// Evaluate an expression on a page and print one result per line
    Eval { expr: String, file: PathBuf },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Convert the original SWDE release into the corpus layout
    ConvertSwde { src: PathBuf, out: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
    #[arg(long, value_enum)]
    transport: Option<TransportKind>,
    #[arg(long)]
    replay_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransportKind {
    Live,
    Replay,
}

impl Overrides {
    fn apply(&self, config: &mut PipelineConfig) -> Result<(), String> {
        if let Some(n) = self.workers {
            config.workers = Some(n);
        }
        if let Some(s) = self.rng_seed {
            config.rng_seed = s;
        }
        match (self.transport, &self.replay_dir) {
            (Some(TransportKind::Live), Some(_)) => {
                return Err("--replay-dir cannot be combined with --transport live".into())
            }
            (Some(TransportKind::Live), None) => config.use_live(),
            (_, Some(dir)) => config.use_replay(dir),
            (Some(TransportKind::Replay), None) => {
                if !matches!(config.ie.transport, xpath_agent::llm::TransportConfig::Replay { .. }) {
                    return Err("--transport replay needs --replay-dir".into());
                }
            }
            (None, None) => {}
        }
        Ok(())
    }
}

fn fail(kind: &str, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("{}", json!({ "level": "error", "kind": kind, "message": message.to_string() }));
    ExitCode::from(1)
}

fn pipeline_kind(e: &PipelineError) -> &'static str {
    use xpath_agent::llm::LlmError;
    let llm = match e {
        PipelineError::Gateway(l) | PipelineError::Llm { source: l, .. } => Some(l),
        PipelineError::Extraction { source: xpath_agent::ie_stage::IeError::Llm(l), .. } => Some(l),
        _ => None,
    };
    match (e, llm) {
        (_, Some(LlmError::ReplayMiss { .. })) => "ReplayMiss",
        (_, Some(LlmError::RateLimited { .. })) => "RateLimited",
        (_, Some(LlmError::MalformedResponse(_))) => "MalformedResponse",
        (_, Some(_)) => "TransportError",
        (PipelineError::Config(_), _) => "ConfigError",
        (PipelineError::Io { .. }, _) => "IoError",
        (PipelineError::Page { .. }, _) => "PageError",
        (PipelineError::Extraction { .. }, _) => "ExtractionError",
        (PipelineError::Corpus(_), _) => "LayoutError",
        _ => "Error",
    }
}

fn read_page(path: &Path) -> Result<xpath_agent::dom::DomDocument, ExitCode> {
    let bytes = fs::read(path).map_err(|e| fail("IoError", format!("{}: {e}", path.display())))?;
    parse_html(&bytes).map_err(|e| fail("PageError", format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), ExitCode> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| fail("IoError", format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(code) | Err(code) => code,
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode, ExitCode> {
    match cmd {
        Command::Run { task, run, out } => {
            let mut config = load_config(&run.config).map_err(|e| fail(pipeline_kind(&e), e))?;
            run.overrides.apply(&mut config).map_err(|e| fail("ConfigError", e))?;
            let spec = load_task(&task, &config).map_err(|e| fail(pipeline_kind(&e), e))?;
            let report = run_task(&spec, &config, &out).map_err(|e| fail(pipeline_kind(&e), e))?;
            for (field, reason) in &report.failed_fields {
                eprintln!("{}", json!({ "level": "warn", "kind": "FieldFailed", "field": field, "message": reason }));
            }
            let table = fs::read_to_string(out.join("metrics.txt")).unwrap_or_default();
            print!("{table}");
            Ok(ExitCode::from(report.exit_code() as u8))
        }
        Command::Bench { corpus, config, out, overrides } => {
            let mut config = load_config(&config).map_err(|e| fail(pipeline_kind(&e), e))?;
            overrides.apply(&mut config).map_err(|e| fail("ConfigError", e))?;
            let report = bench(&corpus, &config, &out).map_err(|e| fail(pipeline_kind(&e), e))?;
            print!("{}", report.table);
            let partial = report.tasks.iter().any(|t| t.exit_code() != 0);
            Ok(ExitCode::from(if partial { 2 } else { 0 }))
        }
        Command::Sanitize { input, output, report } => {
            let doc = read_page(&input)?;
            let (html, rep) = sanitize_and_minify(&doc);
            write_out(output.as_deref(), &html)?;
            if report {
                eprintln!("{}", serde_json::to_string(&rep).expect("report serializes"));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Condense { input, targets, output } => {
            let doc = read_page(&input)?;
            let raw = fs::read_to_string(&targets)
                .map_err(|e| fail("IoError", format!("{}: {e}", targets.display())))?;
            let targets: Vec<String> = serde_json::from_str(&raw)
                .map_err(|e| fail("ConfigError", format!("targets must be a JSON list of strings: {e}")))?;
            let (condensed, plan) = condense(&doc, &targets).map_err(|e| fail("CondenseError", e))?;
            write_out(output.as_deref(), &serialize(&condensed))?;
            eprintln!("{}", json!({ "kept_xpaths": plan.kept_xpaths, "distances": plan.distances }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { dir, out, plot } => {
            let pages = collect_pages(&dir).map_err(|e| fail("IoError", e))?;
            let stats = token_stats(&pages).map_err(|e| fail("StatsError", e))?;
            fs::create_dir_all(&out).map_err(|e| fail("IoError", e))?;
            let w = |name: &str, text: String| {
                fs::write(out.join(name), text).map_err(|e| fail("IoError", format!("{name}: {e}")))
            };
            w("pages.csv", stats.to_csv())?;
            w("summary.csv", stats.summary_csv())?;
            if plot {
                w("plot.json", serde_json::to_string_pretty(&stats.plot_json()).expect("json") + "\n")?;
            }
            print!("{}", stats.summary_csv());
            Ok(ExitCode::SUCCESS)
        }
        Command::Xpath { command: XpathCommand::Eval { expr, file } } => {
            let doc = read_page(&file)?;
            let parsed = parse_xpath(&expr).map_err(|e| fail("SyntaxError", e))?;
            let cx = XPathContext::new(&doc);
            let result = cx.evaluate(&parsed).map_err(|e| fail("EvaluationError", e))?;
            match &result {
                XPathResult::NodeSet(_) => {
                    for s in result_strings(&cx, &result) {
                        println!("{s}");
                    }
                }
                other => println!("{}", result_strings(&cx, other).join("")),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Corpus { command: CorpusCommand::ConvertSwde { src, out } } => {
            let s = convert_swde(&src, &out).map_err(|e| fail("LayoutError", e))?;
            println!("converted {} tasks, {} pages", s.tasks, s.pages);
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Pages below `dir`; the category is the first path component under `dir`.
fn collect_pages(dir: &Path) -> std::io::Result<Vec<PageInput>> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let mut entries: Vec<PathBuf> = fs::read_dir(&d)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        entries.sort();
        for p in entries {
            if p.is_dir() {
                stack.push(p);
            } else if matches!(p.extension().and_then(|e| e.to_str()), Some("htm" | "html")) {
                let rel = p.strip_prefix(dir).unwrap_or(&p);
                let category = match rel.components().count() {
                    1 => "all".to_string(),
                    _ => rel.components().next().unwrap().as_os_str().to_string_lossy().into_owned(),
                };
                out.push(PageInput {
                    category,
                    page_id: rel.to_string_lossy().into_owned(),
                    bytes: fs::read(&p)?,
                });
            }
        }
    }
    out.sort_by(|a, b| a.page_id.cmp(&b.page_id));
    Ok(out)
}
