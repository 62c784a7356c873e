//! End-to-end task runs: sample, extract, program, evaluate, persist.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{load_corpus, sample_ids, CorpusError, CorpusTask, Truth};
use crate::dom::{parse_html, DomDocument, DomError};
use crate::ie_stage::{
    extract_page, merge_targets, ExtractionResult, FieldQuery, IeError, MergedTargets, Multiplicity,
};
use crate::llm::{Gateway, LedgerTotals, LlmConfig, LlmError, RunLedger, TransportConfig};
use crate::metrics::{combine, evaluate_task, render_table, EvalPage, Metrics};
use crate::programmer_stage::{program_xpath, ProgramError, ProgramOutcome, Seed};
use crate::MetricsReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Model used for value and cue extraction.
    pub ie: LlmConfig,
    /// Model used for XPath programming; defaults to `ie`.
    #[serde(default)]
    pub program: Option<LlmConfig>,
    #[serde(default = "default_seeds")]
    pub n_seeds: usize,
    #[serde(default = "default_eval")]
    pub n_eval: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_seeds() -> usize {
    3
}

fn default_eval() -> usize {
    32
}

impl PipelineConfig {
    pub fn program_config(&self) -> &LlmConfig {
        self.program.as_ref().unwrap_or(&self.ie)
    }

    /// Points both models at `dir` through the replay transport.
    pub fn use_replay(&mut self, dir: &Path) {
        for c in std::iter::once(&mut self.ie).chain(self.program.as_mut()) {
            c.transport = TransportConfig::Replay {
                directory: dir.to_path_buf(),
            };
        }
    }

    pub fn use_live(&mut self) {
        for c in std::iter::once(&mut self.ie).chain(self.program.as_mut()) {
            c.transport = TransportConfig::Live;
        }
    }
}

#[derive(thiserror::Error, Debug)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("page {page_id}: {source}")]
    Page {
        page_id: String,
        #[source]
        source: DomError,
    },
    #[error("extraction on page {page_id}: {source}")]
    Extraction {
        page_id: String,
        #[source]
        source: IeError,
    },
    #[error("field {field}: {source}")]
    Llm {
        field: String,
        #[source]
        source: LlmError,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Gateway(#[from] LlmError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Replaces `${NAME}` with the value of environment variable `NAME`.
pub fn interpolate_env(text: &str) -> Result<String, PipelineError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let end = rest[start..]
            .find('}')
            .ok_or_else(|| PipelineError::Config("unterminated ${".into()))?;
        let name = &rest[start + 2..start + end];
        let value = std::env::var(name).map_err(|_| {
            PipelineError::Config(format!("environment variable {name} is not set"))
        })?;
        out.push_str(&value);
        rest = &rest[start + end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Reads a JSON config; relative replay directories resolve against the file.
pub fn load_config(path: &Path) -> Result<PipelineConfig, PipelineError> {
    let raw = fs::read_to_string(path).map_err(io_err(path))?;
    let mut config: PipelineConfig = serde_json::from_str(&interpolate_env(&raw)?)
        .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for c in std::iter::once(&mut config.ie).chain(config.program.as_mut()) {
        if let TransportConfig::Replay { directory } = &mut c.transport {
            if directory.is_relative() {
                *directory = base.join(&*directory);
            }
        }
    }
    Ok(config)
}

/// Task file as written by users. Either list `seed_pages`/`eval_pages`
/// explicitly or give `pages` to be sampled with the configured rng seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub task_id: String,
    pub fields: Vec<FieldQuery>,
    #[serde(default)]
    pub seed_pages: Vec<PathBuf>,
    #[serde(default)]
    pub eval_pages: Vec<PathBuf>,
    #[serde(default)]
    pub pages: Vec<PathBuf>,
    /// Ground truth `{page_id: {field: [values]}}` for the evaluation pages.
    #[serde(default)]
    pub truth: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PageRef {
    pub id: String,
    pub path: PathBuf,
}

impl PageRef {
    fn from_path(path: PathBuf) -> Self {
        let id = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        PageRef { id, path }
    }
}

/// A task with its pages resolved and sampled.
#[derive(Clone, Debug)]
pub struct TaskSpec {
    pub task_id: String,
    pub fields: Vec<FieldQuery>,
    pub seeds: Vec<PageRef>,
    pub eval: Vec<PageRef>,
    pub truth: Truth,
}

pub fn load_task(path: &Path, config: &PipelineConfig) -> Result<TaskSpec, PipelineError> {
    let raw = fs::read_to_string(path).map_err(io_err(path))?;
    let file: TaskFile = serde_json::from_str(&raw)
        .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &PathBuf| PageRef::from_path(base.join(p));
    let (seeds, eval) = if file.seed_pages.is_empty() {
        let all: Vec<PageRef> = file.pages.iter().map(resolve).collect();
        let (s, e) = sample_ids(
            all.iter().map(|p| p.id.clone()).collect(),
            config.n_seeds,
            config.n_eval,
            config.rng_seed,
        )?;
        let pick = |ids: Vec<String>| -> Vec<PageRef> {
            ids.iter()
                .filter_map(|id| all.iter().find(|p| &p.id == id).cloned())
                .collect()
        };
        (pick(s), pick(e))
    } else {
        (
            file.seed_pages.iter().map(resolve).collect(),
            file.eval_pages.iter().map(resolve).collect(),
        )
    };
    let truth = match &file.truth {
        Some(t) => {
            let tp = base.join(t);
            let raw = fs::read_to_string(&tp).map_err(io_err(&tp))?;
            serde_json::from_str(&raw)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", tp.display())))?
        }
        None => Truth::new(),
    };
    if seeds.is_empty() {
        return Err(PipelineError::Config(format!(
            "{}: no seed pages",
            path.display()
        )));
    }
    Ok(TaskSpec {
        task_id: file.task_id,
        fields: file.fields,
        seeds,
        eval,
        truth,
    })
}

/// Builds a task from a corpus entry; field questions are the field names.
pub fn task_from_corpus(
    task: &CorpusTask,
    config: &PipelineConfig,
) -> Result<TaskSpec, PipelineError> {
    let (s, e) = crate::corpus::sample(task, config.n_seeds, config.n_eval, config.rng_seed)?;
    let page = |id: &String| PageRef {
        id: id.clone(),
        path: task
            .page_path(id)
            .expect("sampled from the task")
            .to_path_buf(),
    };
    Ok(TaskSpec {
        task_id: task.id(),
        fields: task
            .fields()
            .into_iter()
            .map(|f| FieldQuery {
                question: f.replace('_', " "),
                name: f,
                multiplicity: Multiplicity::Multiple,
            })
            .collect(),
        seeds: s.iter().map(page).collect(),
        eval: e.iter().map(page).collect(),
        truth: task.truth.clone(),
    })
}

#[derive(Clone, Debug)]
pub struct TaskReport {
    pub task_id: String,
    pub metrics: MetricsReport,
    pub xpaths: BTreeMap<String, String>,
    /// Fields without a usable XPath, with the reason.
    pub failed_fields: Vec<(String, String)>,
    pub ledger: LedgerTotals,
}

impl TaskReport {
    /// 0 when every field produced an XPath, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed_fields.is_empty() {
            0
        } else {
            2
        }
    }
}

fn read_page(p: &PageRef) -> Result<DomDocument, PipelineError> {
    let bytes = fs::read(&p.path).map_err(io_err(&p.path))?;
    parse_html(&bytes).map_err(|source| PipelineError::Page {
        page_id: p.id.clone(),
        source,
    })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(f))
            .unwrap_or_else(|e| panic!("cannot start {n} workers: {e}")),
        None => f(),
    }
}

/// Runs one task and writes its artifacts under `out_dir`:
/// `xpaths.json`, `metrics.json`, `metrics.txt`, `extraction.json`,
/// `ledger.jsonl`, `sanitized/<page>.html` and `condensed/<field>/<page>.html`.
pub fn run_task(
    spec: &TaskSpec,
    config: &PipelineConfig,
    out_dir: &Path,
) -> Result<TaskReport, PipelineError> {
    let ledger = Arc::new(RunLedger::new());
    let ie_gw = Gateway::from_config(&config.ie)?.with_ledger(ledger.clone());
    let program_gw = Gateway::from_config(config.program_config())?.with_ledger(ledger.clone());
    run_task_with(spec, config, &ie_gw, &program_gw, &ledger, out_dir)
}

pub fn run_task_with(
    spec: &TaskSpec,
    config: &PipelineConfig,
    ie_gw: &Gateway,
    program_gw: &Gateway,
    ledger: &RunLedger,
    out_dir: &Path,
) -> Result<TaskReport, PipelineError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    ledger.note("task_id", json!(spec.task_id));
    ledger.note("rng_seed", json!(config.rng_seed));
    ledger.note(
        "seeds",
        json!(spec.seeds.iter().map(|p| &p.id).collect::<Vec<_>>()),
    );
    ledger.note(
        "eval",
        json!(spec.eval.iter().map(|p| &p.id).collect::<Vec<_>>()),
    );
    ledger.note(
        "models",
        json!({ "ie": ie_gw.model(), "program": program_gw.model() }),
    );
    let max_retries = config.ie.max_retries;

    let result = with_pool(config.workers, || -> Result<_, PipelineError> {
        let seed_docs: Vec<DomDocument> = spec
            .seeds
            .par_iter()
            .map(read_page)
            .collect::<Result<_, _>>()?;

        let extractions = spec
            .seeds
            .par_iter()
            .zip(&seed_docs)
            .map(|(p, doc)| {
                extract_page(&p.id, doc, &spec.fields, ie_gw, max_retries).map_err(|source| {
                    PipelineError::Extraction {
                        page_id: p.id.clone(),
                        source,
                    }
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (p, x) in spec.seeds.iter().zip(&extractions) {
            write(
                &out_dir.join("sanitized").join(format!("{}.html", p.id)),
                &x.sanitized_html,
            )?;
        }
        let results: Vec<ExtractionResult> = extractions.into_iter().map(|x| x.result).collect();
        let merged: BTreeMap<String, MergedTargets> = spec
            .fields
            .iter()
            .map(|f| (f.name.clone(), merge_targets(&results, &f.name)))
            .collect();
        write(
            &out_dir.join("extraction.json"),
            pretty(&json!({ "pages": results, "merged": merged })),
        )?;

        let outcomes: Vec<(String, Result<ProgramOutcome, ProgramError>)> = spec
            .fields
            .par_iter()
            .map(|field| {
                let seeds: Vec<Seed> = spec
                    .seeds
                    .iter()
                    .zip(&seed_docs)
                    .zip(&results)
                    .map(|((p, doc), r)| {
                        let fx = r.fields.get(&field.name).cloned().unwrap_or_default();
                        let mut anchors = fx.values.clone();
                        if !fx.cue_text.is_empty() {
                            anchors.push(fx.cue_text.clone());
                        }
                        Seed {
                            page_id: &p.id,
                            doc,
                            values: fx.values,
                            anchors,
                        }
                    })
                    .collect();
                (
                    field.name.clone(),
                    program_xpath(field, &seeds, &merged[&field.name], program_gw),
                )
            })
            .collect();

        let eval_docs: Vec<DomDocument> = spec
            .eval
            .par_iter()
            .map(read_page)
            .collect::<Result<_, _>>()?;
        Ok((outcomes, eval_docs))
    });
    let (outcomes, eval_docs) = result?;

    let mut xpaths = BTreeMap::new();
    let mut failed = Vec::new();
    let mut xpath_json = serde_json::Map::new();
    for (field, outcome) in outcomes {
        match outcome {
            Ok(o) => {
                for (page_id, html) in &o.condensed {
                    write(
                        &out_dir
                            .join("condensed")
                            .join(&field)
                            .join(format!("{page_id}.html")),
                        html,
                    )?;
                }
                xpath_json.insert(
                    field.clone(),
                    json!({
                        "xpath": o.best.xpath,
                        "score": o.best.score,
                        "iteration": o.best.iteration,
                        "iterations": o.calls,
                        "per_page_feedback": o.best.per_page_feedback,
                    }),
                );
                xpaths.insert(field, o.best.xpath);
            }
            Err(ProgramError::Llm(source)) => return Err(PipelineError::Llm { field, source }),
            Err(e) => {
                log::error!("field {field}: {e}");
                xpath_json.insert(field.clone(), json!({ "error": e.to_string() }));
                failed.push((field, e.to_string()));
            }
        }
    }
    write(&out_dir.join("xpaths.json"), pretty(&xpath_json))?;

    // fields without an xpath are scored with empty predictions
    let mut scored = xpaths.clone();
    for (f, _) in &failed {
        scored.insert(f.clone(), String::new());
    }
    let empty = BTreeMap::new();
    let pages: Vec<EvalPage> = spec
        .eval
        .iter()
        .zip(&eval_docs)
        .map(|(p, doc)| EvalPage {
            page_id: &p.id,
            doc,
            truth: spec.truth.get(&p.id).unwrap_or(&empty),
        })
        .collect();
    let metrics: MetricsReport = evaluate_task(&scored, &pages);
    write(&out_dir.join("metrics.json"), pretty(&metrics))?;
    let mut rows: Vec<(String, Metrics<f64>)> = metrics
        .per_field
        .iter()
        .map(|(f, m)| (f.clone(), m.clone()))
        .collect();
    rows.push((
        format!("{} (overall)", program_gw.model()),
        metrics.overall.clone(),
    ));
    write(&out_dir.join("metrics.txt"), render_table(&rows))?;

    let mut buf = Vec::new();
    ledger.write_jsonl(&mut buf).map_err(io_err(out_dir))?;
    write(&out_dir.join("ledger.jsonl"), buf)?;

    Ok(TaskReport {
        task_id: spec.task_id.clone(),
        metrics,
        xpaths,
        failed_fields: failed,
        ledger: ledger.totals(),
    })
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub tasks: Vec<TaskReport>,
    pub overall: Metrics<f64>,
    pub table: String,
}

/// Runs every corpus task and summarizes the results in one table.
pub fn bench(
    corpus_root: &Path,
    config: &PipelineConfig,
    out_dir: &Path,
) -> Result<BenchReport, PipelineError> {
    let tasks = load_corpus(corpus_root)?;
    let specs = tasks
        .iter()
        .map(|t| task_from_corpus(t, config))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = with_pool(config.workers, || {
        specs
            .par_iter()
            .map(|s| run_task(s, config, &out_dir.join(&s.task_id)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let overall = combine(
        &reports
            .iter()
            .map(|r| &r.metrics.overall)
            .collect::<Vec<_>>(),
    );
    let mut rows: Vec<(String, Metrics<f64>)> = reports
        .iter()
        .map(|r| (r.task_id.clone(), r.metrics.overall.clone()))
        .collect();
    rows.push((config.program_config().model_name.clone(), overall.clone()));
    let table = render_table(&rows);
    write(&out_dir.join("bench.txt"), &table)?;
    Ok(BenchReport {
        tasks: reports,
        overall,
        table,
    })
}
