//! Fixture task runs through the full pipeline.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use xpath_agent::llm::{Gateway, RecordingTransport, RunLedger, TransportConfig};
use xpath_agent::pipeline::{load_config, load_task, run_task, run_task_with, PipelineConfig, PipelineError, TaskReport, TaskSpec};

use super::fixtures;
use super::scripted::ScriptedModel;

pub const TASKS: &[&str] = &["book-pagebarn", "book-shelf", "camera-lensmart", "camera-shuttr"];

pub fn config() -> PipelineConfig {
    load_config(&fixtures().join("config.json")).unwrap()
}

pub fn replay_dir() -> PathBuf {
    match &config().ie.transport {
        TransportConfig::Replay { directory } => directory.clone(),
        TransportConfig::Live => panic!("fixture config must use replay"),
    }
}

pub fn task(id: &str) -> TaskSpec {
    load_task(&fixtures().join("tasks").join(format!("{id}.json")), &config()).unwrap()
}

/// Runs `id` against the recorded replies (re-recorded first when regenerating).
pub fn replay(id: &str, out: &Path) -> Result<TaskReport, PipelineError> {
    static RECORDED: OnceLock<()> = OnceLock::new();
    if super::regenerating() {
        RECORDED.get_or_init(regenerate_replay);
    }
    run_task(&task(id), &config(), out)
}

/// Runs `id` against the scripted model, recording every reply into `record_dir`.
pub fn record(id: &str, record_dir: &Path, out: &Path) -> TaskReport {
    let config = config();
    let ledger = Arc::new(RunLedger::new());
    let gateway = |model: &str| {
        let t = RecordingTransport::new(ScriptedModel::from_fixtures().transport(), record_dir).unwrap();
        Gateway::new(Arc::new(t), model).with_ledger(Arc::clone(&ledger))
    };
    let ie = gateway(&config.ie.model_name);
    let program = gateway(&config.program_config().model_name);
    run_task_with(&task(id), &config, &ie, &program, &ledger, out).unwrap()
}

/// Rewrites the replay directory from scratch with the scripted model.
fn regenerate_replay() {
    let dir = replay_dir();
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    let scratch = tempfile::tempdir().unwrap();
    for id in TASKS {
        record(id, &dir, &scratch.path().join(id));
    }
}
