//! SWDE-style corpus loading and seed/eval sampling.
//!
//! Layout:
//!
//! ```text
//! <root>/<vertical>/<vertical>-<site>/<page_id>.htm
//! <root>/groundtruth/<vertical>/<site>.json      {page_id: {field: [values]}}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Truth = BTreeMap<String, BTreeMap<String, Vec<String>>>;

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusTask {
    pub vertical: String,
    pub site: String,
    pub pages: Vec<(String, PathBuf)>,
    pub truth: Truth,
}

impl CorpusTask {
    pub fn id(&self) -> String {
        format!("{}-{}", self.vertical, self.site)
    }

    /// Field names in sorted order.
    pub fn fields(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.truth.values().flat_map(|f| f.keys()).collect();
        set.into_iter().cloned().collect()
    }

    pub fn page_path(&self, page_id: &str) -> Option<&Path> {
        self.pages
            .iter()
            .find(|(id, _)| id == page_id)
            .map(|(_, p)| p.as_path())
    }
}

#[derive(thiserror::Error, Debug)]
pub enum CorpusError {
    #[error("{}: {reason}", path.display())]
    Layout { path: PathBuf, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("task has {have} pages but {need} seeds were requested")]
    InsufficientPages { have: usize, need: usize },
}

fn layout(path: &Path, reason: impl Into<String>) -> CorpusError {
    CorpusError::Layout {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io(dir)))
        .collect::<Result<_, _>>()?;
    v.sort();
    Ok(v)
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn is_page(p: &Path) -> bool {
    p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("htm" | "html"))
}

pub fn load_corpus(root: &Path) -> Result<Vec<CorpusTask>, CorpusError> {
    if !root.is_dir() {
        return Err(layout(root, "corpus root is not a directory"));
    }
    let mut tasks = Vec::new();
    for vdir in sorted_entries(root)? {
        let vertical = file_name(&vdir);
        if !vdir.is_dir() || vertical == "groundtruth" || vertical.starts_with('.') {
            continue;
        }
        for sdir in sorted_entries(&vdir)? {
            if !sdir.is_dir() {
                continue;
            }
            let name = file_name(&sdir);
            let site = name
                .strip_prefix(&format!("{vertical}-"))
                .filter(|s| !s.is_empty())
                .ok_or_else(|| {
                    layout(
                        &sdir,
                        format!("expected a directory named {vertical}-<site>"),
                    )
                })?
                .to_string();
            tasks.push(load_task(root, &vertical, &site, &sdir)?);
        }
    }
    Ok(tasks)
}

fn load_task(
    root: &Path,
    vertical: &str,
    site: &str,
    dir: &Path,
) -> Result<CorpusTask, CorpusError> {
    let truth_path = root
        .join("groundtruth")
        .join(vertical)
        .join(format!("{site}.json"));
    if !truth_path.is_file() {
        return Err(layout(&truth_path, "missing ground-truth file"));
    }
    let raw = fs::read_to_string(&truth_path).map_err(io(&truth_path))?;
    let mut truth: Truth = serde_json::from_str(&raw)
        .map_err(|e| layout(&truth_path, format!("bad ground truth: {e}")))?;

    let mut pages = Vec::new();
    for p in sorted_entries(dir)? {
        if !is_page(&p) {
            continue;
        }
        let id = p
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        if truth.contains_key(&id) {
            pages.push((id, p));
        } else {
            log::warn!("{}: no ground truth, page dropped", p.display());
        }
    }
    let before = truth.len();
    truth.retain(|id, _| pages.iter().any(|(p, _)| p == id));
    if truth.len() < before {
        log::warn!(
            "{}: {} ground-truth entries have no page",
            truth_path.display(),
            before - truth.len()
        );
    }
    let mut field_sets = truth.values().map(|f| f.keys().collect::<Vec<_>>());
    if let Some(first) = field_sets.next() {
        if field_sets.any(|s| s != first) {
            return Err(layout(&truth_path, "pages disagree on the field set"));
        }
    }
    Ok(CorpusTask {
        vertical: vertical.to_string(),
        site: site.to_string(),
        pages,
        truth,
    })
}

/// Shuffles the sorted page ids with `rng_seed`, then takes `n_seeds` seeds
/// followed by up to `n_eval` evaluation pages.
pub fn sample(
    task: &CorpusTask,
    n_seeds: usize,
    n_eval: usize,
    rng_seed: u64,
) -> Result<(Vec<String>, Vec<String>), CorpusError> {
    sample_ids(
        task.pages.iter().map(|(id, _)| id.clone()).collect(),
        n_seeds,
        n_eval,
        rng_seed,
    )
}

pub fn sample_ids(
    mut ids: Vec<String>,
    n_seeds: usize,
    n_eval: usize,
    rng_seed: u64,
) -> Result<(Vec<String>, Vec<String>), CorpusError> {
    if ids.len() < n_seeds {
        return Err(CorpusError::InsufficientPages {
            have: ids.len(),
            need: n_seeds,
        });
    }
    ids.sort();
    ids.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    ids.shuffle(&mut rng);
    let eval_end = n_seeds + n_eval.min(ids.len() - n_seeds);
    let eval = ids[n_seeds..eval_end].to_vec();
    ids.truncate(n_seeds);
    Ok((ids, eval))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConvertSummary {
    pub tasks: usize,
    pub pages: usize,
}

/// Converts the original SWDE release into the layout read by [`load_corpus`].
///
/// Source pages live in `<vertical>/<vertical>-<site>(<count>)/NNNN.htm`; each
/// attribute has a tab-separated file `groundtruth/<vertical>/<vertical>-<site>-<attr>.txt`
/// whose first line is `vertical<TAB>site<TAB>attr`, second line a count
/// summary, then `page_id<TAB>n<TAB>value...` rows with `<NULL>` for no value.
pub fn convert_swde(src: &Path, out: &Path) -> Result<ConvertSummary, CorpusError> {
    let gt_root = src.join("groundtruth");
    if !gt_root.is_dir() {
        return Err(layout(&gt_root, "missing SWDE groundtruth directory"));
    }
    let mut truth: BTreeMap<(String, String), Truth> = BTreeMap::new();
    for vdir in sorted_entries(&gt_root)? {
        if !vdir.is_dir() {
            continue;
        }
        for f in sorted_entries(&vdir)? {
            if f.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let text = fs::read_to_string(&f).map_err(io(&f))?;
            let mut lines = text.lines();
            let header: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
            let [vertical, site, attr] = header[..] else {
                return Err(layout(
                    &f,
                    "first line must be vertical, site and attribute",
                ));
            };
            lines.next();
            let task = truth
                .entry((vertical.trim().to_string(), site.trim().to_string()))
                .or_default();
            for row in lines.filter(|l| !l.trim().is_empty()) {
                let cols: Vec<&str> = row.split('\t').collect();
                if cols.len() < 2 {
                    return Err(layout(&f, format!("short row {row:?}")));
                }
                let values: Vec<String> = cols[2..]
                    .iter()
                    .map(|v| v.trim())
                    .filter(|v| !v.is_empty() && *v != "<NULL>")
                    .map(str::to_string)
                    .collect();
                task.entry(cols[0].trim().to_string())
                    .or_default()
                    .insert(attr.trim().to_string(), values);
            }
        }
    }

    let mut summary = ConvertSummary::default();
    for ((vertical, site), task_truth) in &truth {
        let prefix = format!("{vertical}-{site}");
        let vdir = src.join(vertical);
        let page_dir = sorted_entries(&vdir)?
            .into_iter()
            .find(|p| {
                let n = file_name(p);
                p.is_dir()
                    && (n == prefix || n.strip_prefix(&prefix).is_some_and(|r| r.starts_with('(')))
            })
            .ok_or_else(|| layout(&vdir, format!("no page directory for {prefix}")))?;
        let dest = out.join(vertical).join(&prefix);
        fs::create_dir_all(&dest).map_err(io(&dest))?;
        for p in sorted_entries(&page_dir)? {
            if is_page(&p) {
                let target = dest.join(p.file_name().unwrap_or_default());
                fs::copy(&p, &target).map_err(io(&target))?;
                summary.pages += 1;
            }
        }
        let gt_dir = out.join("groundtruth").join(vertical);
        fs::create_dir_all(&gt_dir).map_err(io(&gt_dir))?;
        let gt = gt_dir.join(format!("{site}.json"));
        let json = serde_json::to_string_pretty(task_truth).expect("truth serializes");
        fs::write(&gt, json + "\n").map_err(io(&gt))?;
        summary.tasks += 1;
    }
    Ok(summary)
}
