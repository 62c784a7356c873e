//! Stage two: propose an XPath, evaluate it on the seed pages, feed the
//! outcome back, and keep the best of at most [`MAX_ROUNDS`] candidates.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::condenser::condense;
use crate::dom::{serialize, DomDocument};
use crate::ie_stage::{FieldQuery, MergedTargets};
use crate::llm::{render_feedback_prompt, render_program_prompts, ChatMessage, Gateway, LlmError};
use crate::text::{first_json_object, json_list, normalize_ws, strip_code_fence};
use crate::xpath::select_strings;

pub const MAX_ROUNDS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackStatus {
    Correct,
    Missing,
    Surplus,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationFeedback {
    pub page_id: String,
    pub extracted: Vec<String>,
    pub missing: Vec<String>,
    pub redundant: Vec<String>,
    /// Targets covered by some extracted string.
    pub matched: Vec<String>,
    pub status: FeedbackStatus,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XPathCandidate {
    pub xpath: String,
    pub thought: String,
    pub iteration: usize,
    pub score: f64,
    pub per_page_feedback: Vec<EvaluationFeedback>,
}

/// A seed page with the values expected from it.
pub struct Seed<'a> {
    pub page_id: &'a str,
    pub doc: &'a DomDocument,
    pub values: Vec<String>,
    /// Values and cue text used to condense this page.
    pub anchors: Vec<String>,
}

#[derive(thiserror::Error, Debug)]
pub enum ProgramError {
    #[error("no seed page has a target value")]
    NoTargets,
    #[error("none of the {rounds} responses contained a usable xpath")]
    NoViableCandidate { rounds: usize },
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
#[error("malformed program response: {0}")]
pub struct MalformedJson(pub String);

fn matches(extracted: &str, target: &str) -> bool {
    extracted == target || extracted.contains(target)
}

/// Classifies the result of `xpath` on one page against its targets.
pub fn evaluate_on_page(
    xpath: &str,
    page_id: &str,
    doc: &DomDocument,
    targets: &[String],
) -> EvaluationFeedback {
    let targets: Vec<String> = targets
        .iter()
        .map(|t| normalize_ws(t))
        .filter(|t| !t.is_empty())
        .collect();
    let extracted = match select_strings(doc, xpath) {
        Ok(v) => v,
        Err(e) => {
            return EvaluationFeedback {
                page_id: page_id.to_string(),
                extracted: Vec::new(),
                missing: targets,
                redundant: Vec::new(),
                matched: Vec::new(),
                status: FeedbackStatus::Invalid,
                message: format!("Invalid: {e}"),
            }
        }
    };
    let extracted: Vec<String> = extracted
        .iter()
        .map(|s| normalize_ws(s))
        .filter(|s| !s.is_empty())
        .collect();
    let (matched, missing): (Vec<String>, Vec<String>) = targets
        .into_iter()
        .partition(|t| extracted.iter().any(|e| matches(e, t)));
    let redundant: Vec<String> = extracted
        .iter()
        .filter(|e| !matched.iter().chain(&missing).any(|t| matches(e, t)))
        .cloned()
        .collect();
    let (status, message) = match (missing.is_empty(), redundant.is_empty()) {
        (true, true) => (FeedbackStatus::Correct, "Correct".to_string()),
        (false, true) => (
            FeedbackStatus::Missing,
            format!("Missing: {}", json_list(&missing)),
        ),
        (true, false) => (
            FeedbackStatus::Surplus,
            format!("Surplus: {}", json_list(&redundant)),
        ),
        (false, false) => (
            FeedbackStatus::Missing,
            format!(
                "Missing: {}; Surplus: {}",
                json_list(&missing),
                json_list(&redundant)
            ),
        ),
    };
    EvaluationFeedback {
        page_id: page_id.to_string(),
        extracted,
        missing,
        redundant,
        matched,
        status,
        message,
    }
}

pub fn evaluate_xpath(xpath: &str, seeds: &[Seed<'_>]) -> Vec<EvaluationFeedback> {
    seeds
        .iter()
        .map(|s| evaluate_on_page(xpath, s.page_id, s.doc, &s.values))
        .collect()
}

fn page_f1(f: &EvaluationFeedback) -> f64 {
    match f.status {
        FeedbackStatus::Invalid => return 0.0,
        FeedbackStatus::Correct => return 1.0,
        _ => {}
    }
    let e = f.extracted.len();
    let t = f.matched.len() + f.missing.len();
    if e == 0 || t == 0 || f.matched.is_empty() {
        return 0.0;
    }
    let p = (e - f.redundant.len()) as f64 / e as f64;
    let r = f.matched.len() as f64 / t as f64;
    2.0 * p * r / (p + r)
}

/// Mean per-page F1; Invalid pages score 0.
pub fn score_candidate(feedbacks: &[EvaluationFeedback]) -> f64 {
    if feedbacks.is_empty() {
        return 0.0;
    }
    feedbacks.iter().map(page_f1).sum::<f64>() / feedbacks.len() as f64
}

pub fn parse_program_response(raw: &str) -> Result<(String, String), MalformedJson> {
    let body = strip_code_fence(raw);
    let obj = first_json_object(body).ok_or_else(|| MalformedJson("no JSON object".into()))?;
    let v: Value = serde_json::from_str(obj).map_err(|e| MalformedJson(e.to_string()))?;
    let field = |k: &str| {
        v.get(k)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| MalformedJson(format!("missing string key {k:?}")))
    };
    Ok((field("thought")?, field("xpath")?))
}

/// Everything the loop produced for one field.
#[derive(Clone, Debug, Serialize)]
pub struct ProgramOutcome {
    pub best: XPathCandidate,
    pub candidates: Vec<XPathCandidate>,
    pub calls: usize,
    /// Condensed fragment per seed page, in seed order.
    #[serde(skip)]
    pub condensed: Vec<(String, String)>,
    #[serde(skip)]
    pub transcript: Vec<ChatMessage>,
}

/// Condenses each seed page around its anchors and collects the static XPaths
/// of the kept nodes.
pub fn prepare_context(
    seeds: &[Seed<'_>],
    merged: &MergedTargets,
) -> (Vec<(String, String)>, Vec<String>) {
    let mut pages = Vec::new();
    let mut xpaths: Vec<String> = Vec::new();
    for s in seeds {
        let anchors = if s.anchors.is_empty() {
            &merged.all
        } else {
            &s.anchors
        };
        match condense(s.doc, anchors) {
            Ok((doc, plan)) => {
                pages.push((s.page_id.to_string(), serialize(&doc)));
                for x in plan.kept_xpaths.values().flatten() {
                    if !xpaths.contains(x) {
                        xpaths.push(x.clone());
                    }
                }
            }
            Err(e) => {
                log::warn!("{}: not condensed ({e}); skipped in the prompt", s.page_id);
            }
        }
    }
    (pages, xpaths)
}

pub fn program_xpath(
    field: &FieldQuery,
    seeds: &[Seed<'_>],
    merged: &MergedTargets,
    gateway: &Gateway,
) -> Result<ProgramOutcome, ProgramError> {
    if seeds.iter().all(|s| s.values.is_empty()) {
        return Err(ProgramError::NoTargets);
    }
    let (condensed, static_xpaths) = prepare_context(seeds, merged);
    let mut messages = render_program_prompts(
        &condensed,
        &field.name,
        &merged.values,
        &merged.cue,
        &static_xpaths,
    );
    let mut candidates: Vec<XPathCandidate> = Vec::new();
    let mut calls = 0;
    for round in 0..MAX_ROUNDS {
        let reply = gateway.complete(&format!("program/{}/{round}", field.name), &messages)?;
        calls += 1;
        messages.push(ChatMessage::assistant(reply.clone()));
        let feedback = match parse_program_response(&reply) {
            Ok((thought, xpath)) => {
                let fb = evaluate_xpath(&xpath, seeds);
                let score = score_candidate(&fb);
                log::info!("{} round {round}: {xpath} scored {score:.3}", field.name);
                candidates.push(XPathCandidate {
                    xpath,
                    thought,
                    iteration: round,
                    score,
                    per_page_feedback: fb.clone(),
                });
                if score == 1.0 {
                    break;
                }
                fb
            }
            Err(e) => {
                log::warn!("{} round {round}: {e}", field.name);
                seeds
                    .iter()
                    .map(|s| EvaluationFeedback {
                        page_id: s.page_id.to_string(),
                        extracted: Vec::new(),
                        missing: s.values.clone(),
                        redundant: Vec::new(),
                        matched: Vec::new(),
                        status: FeedbackStatus::Invalid,
                        message: "Invalid: reply must be a JSON object with \"thought\" and \"xpath\" strings".into(),
                    })
                    .collect()
            }
        };
        if round + 1 < MAX_ROUNDS {
            let prompt = render_feedback_prompt(&feedback).expect("seeds are non-empty");
            messages.push(ChatMessage::user(prompt));
        }
    }
    let best = best_candidate(&candidates)
        .cloned()
        .ok_or(ProgramError::NoViableCandidate { rounds: calls })?;
    Ok(ProgramOutcome {
        best,
        candidates,
        calls,
        condensed,
        transcript: messages,
    })
}

/// Highest score, earliest iteration on ties.
pub fn best_candidate(candidates: &[XPathCandidate]) -> Option<&XPathCandidate> {
    let mut best: Option<&XPathCandidate> = None;
    for c in candidates {
        if best.is_none_or(|b| c.score > b.score) {
            best = Some(c);
        }
    }
    best
}
