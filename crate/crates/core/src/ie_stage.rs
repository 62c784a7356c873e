//! Stage one: values and cue texts from sanitized pages.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dom::{parse_str, DomDocument};
use crate::llm::{json_example, render_ie_prompt, ChatMessage, Gateway, LlmError};
use crate::sanitizer::sanitize_and_minify;
use crate::text::{first_json_object, normalize_ws, strip_code_fence};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    Single,
    #[default]
    Multiple,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldQuery {
    pub name: String,
    pub question: String,
    #[serde(default)]
    pub multiplicity: Multiplicity,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldExtraction {
    pub values: Vec<String>,
    pub cue_text: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub page_id: String,
    pub fields: BTreeMap<String, FieldExtraction>,
}

#[derive(thiserror::Error, Debug)]
pub enum IeError {
    #[error("response has no \"Conclusion:\" marker")]
    NoConclusion,
    #[error("conclusion is not a JSON object: {0}")]
    MalformedJson(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("duplicate field name {0}")]
    DuplicateField(String),
}

/// Builds the question block: one `name: question` line per field.
pub fn compose_query(queries: &[FieldQuery]) -> String {
    queries
        .iter()
        .map(|q| format!("{}: {}", q.name, q.question))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_ie_response(raw: &str, expected: &[FieldQuery]) -> Result<ExtractionResult, IeError> {
    let at = raw.rfind("Conclusion:").ok_or(IeError::NoConclusion)?;
    let body = strip_code_fence(&raw[at + "Conclusion:".len()..]);
    let obj = first_json_object(body).ok_or_else(|| IeError::MalformedJson(body.to_string()))?;
    let v: Value = serde_json::from_str(obj).map_err(|e| IeError::MalformedJson(e.to_string()))?;
    let Value::Object(map) = v else {
        return Err(IeError::MalformedJson("not an object".into()));
    };
    let mut fields = BTreeMap::new();
    for q in expected {
        let fx = match map.get(&q.name) {
            None | Some(Value::Null) => FieldExtraction::default(),
            Some(Value::Object(o)) => FieldExtraction {
                values: string_list(o.get("value").or_else(|| o.get("values"))),
                cue_text: o.get("cue_text").map(scalar_string).unwrap_or_default(),
            },
            // bare value or list without the object wrapper
            Some(other) => FieldExtraction {
                values: string_list(Some(other)),
                cue_text: String::new(),
            },
        };
        fields.insert(q.name.clone(), fx);
    }
    Ok(ExtractionResult {
        page_id: String::new(),
        fields,
    })
}

fn scalar_string(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn string_list(v: Option<&Value>) -> Vec<String> {
    let items: Vec<String> = match v {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(a)) => a.iter().map(scalar_string).collect(),
        Some(other) => vec![scalar_string(other)],
    };
    items.into_iter().filter(|s| !s.trim().is_empty()).collect()
}

/// Drops values and cues that do not occur in `page_text` after whitespace
/// normalization. Returns how many strings were removed.
pub fn consistency_filter(result: &mut ExtractionResult, page_text: &str) -> usize {
    let hay = normalize_ws(page_text);
    let mut dropped = 0;
    for (field, fx) in result.fields.iter_mut() {
        fx.values.retain(|v| {
            let keep = hay.contains(&normalize_ws(v));
            if !keep {
                log::warn!(
                    "{}: dropping {field} value {v:?} not found on page",
                    result.page_id
                );
                dropped += 1;
            }
            keep
        });
        let mut seen = Vec::new();
        fx.values.retain(|v| {
            let n = normalize_ws(v);
            let fresh = !seen.contains(&n);
            seen.push(n);
            fresh
        });
        if !fx.cue_text.is_empty() && !hay.contains(&normalize_ws(&fx.cue_text)) {
            log::warn!(
                "{}: dropping {field} cue {:?} not found on page",
                result.page_id,
                fx.cue_text
            );
            fx.cue_text.clear();
            dropped += 1;
        }
    }
    dropped
}

/// Sanitized page plus what the model extracted from it.
pub struct PageExtraction {
    pub result: ExtractionResult,
    pub sanitized_html: String,
}

/// sanitize, minify, prompt, parse and filter one page. Parse failures are
/// retried up to `max_retries` times.
pub fn extract_page(
    page_id: &str,
    page: &DomDocument,
    queries: &[FieldQuery],
    gateway: &Gateway,
    max_retries: u32,
) -> Result<PageExtraction, IeError> {
    for (i, q) in queries.iter().enumerate() {
        if queries[..i].iter().any(|p| p.name == q.name) {
            return Err(IeError::DuplicateField(q.name.clone()));
        }
    }
    let (html, _) = sanitize_and_minify(page);
    let prompt = render_ie_prompt(&compose_query(queries), &html, &json_example(queries));
    let messages = [ChatMessage::user(prompt)];
    let mut attempt = 0;
    let mut result = loop {
        let label = format!("ie/{page_id}/{attempt}");
        let reply = gateway.complete(&label, &messages)?;
        match parse_ie_response(&reply, queries) {
            Ok(r) => break r,
            Err(e) if attempt < max_retries => {
                log::warn!("{page_id}: unusable IE response ({e}), retrying");
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    };
    result.page_id = page_id.to_string();
    let sanitized = parse_str(&html);
    consistency_filter(&mut result, &sanitized.visible_text(sanitized.root()));
    Ok(PageExtraction {
        result,
        sanitized_html: html,
    })
}

/// A field's stage-two inputs merged over all seed pages.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MergedTargets {
    /// Values then cue of each page in page order, deduplicated.
    pub all: Vec<String>,
    pub values: Vec<String>,
    /// First non-empty cue text.
    pub cue: String,
}

pub fn merge_targets(results: &[ExtractionResult], field: &str) -> MergedTargets {
    let mut m = MergedTargets::default();
    let push = |list: &mut Vec<String>, s: &str| {
        if !s.is_empty() && !list.iter().any(|x| x == s) {
            list.push(s.to_string());
        }
    };
    for r in results {
        let Some(fx) = r.fields.get(field) else {
            continue;
        };
        for v in &fx.values {
            push(&mut m.all, v);
            push(&mut m.values, v);
        }
        push(&mut m.all, &fx.cue_text);
        if m.cue.is_empty() {
            m.cue = fx.cue_text.clone();
        }
    }
    m
}
