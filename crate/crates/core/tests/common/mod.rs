//! Shared test support: fixture access, golden files, independent oracles
//! and the scripted model that stands in for both LLM stages.

#![allow(dead_code)]

pub mod condense_oracle;
pub mod loop_cases;
pub mod runs;
pub mod sanitize_oracle;
pub mod static_cases;
pub mod trees;
pub mod xpath_cases;
pub mod xpath_oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use xpath_agent::corpus::load_corpus;
use xpath_agent::dom::{parse_html, DomDocument};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
}

pub fn corpus_root() -> PathBuf {
    fixtures().join("corpus")
}

/// Goldens and replay files are rewritten instead of checked when set.
pub fn regenerating() -> bool {
    std::env::var_os("XPA_REGENERATE").is_some_and(|v| v == "1")
}

/// Compares oracle output with the golden file at `path`, or writes it when regenerating.
pub fn check_golden(path: &Path, oracle: &str) -> Result<(), String> {
    if regenerating() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, oracle).unwrap();
        return Ok(());
    }
    compare_golden(path, oracle)
}

/// Compares `actual` with the golden file at `path`; never writes.
pub fn compare_golden(path: &Path, actual: &str) -> Result<(), String> {
    let expected = fs::read_to_string(path)
        .map_err(|e| format!("{}: {e} (run with XPA_REGENERATE=1)", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let at = expected
            .bytes()
            .zip(actual.bytes())
            .position(|(a, b)| a != b)
            .unwrap_or(expected.len().min(actual.len()));
        Err(format!(
            "{} differs at byte {at} (golden {} bytes, actual {} bytes)",
            path.display(),
            expected.len(),
            actual.len()
        ))
    }
}

pub struct FixturePage {
    pub task: String,
    pub site: String,
    pub page_id: String,
    pub path: PathBuf,
    pub truth: BTreeMap<String, Vec<String>>,
}

impl FixturePage {
    pub fn doc(&self) -> DomDocument {
        parse_html(&fs::read(&self.path).unwrap()).unwrap()
    }

    pub fn bytes(&self) -> usize {
        fs::metadata(&self.path).unwrap().len() as usize
    }

    /// Every truth value of the page, in field order.
    pub fn all_values(&self) -> Vec<String> {
        self.truth.values().flatten().cloned().collect()
    }

    pub fn key(&self) -> String {
        format!("{}/{}", self.task, self.page_id)
    }
}

pub fn fixture_pages() -> Vec<FixturePage> {
    let mut out = Vec::new();
    for task in load_corpus(&corpus_root()).unwrap() {
        for (page_id, path) in &task.pages {
            out.push(FixturePage {
                task: task.id(),
                site: task.site.clone(),
                page_id: page_id.clone(),
                path: path.clone(),
                truth: task.truth[page_id].clone(),
            });
        }
    }
    out
}

/// Pages whose source is large enough to resemble real benchmark pages.
pub fn is_large(page: &FixturePage) -> bool {
    page.bytes() > 50_000
}

/// Recursively collects every file under `dir` with its contents, keyed by relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}
