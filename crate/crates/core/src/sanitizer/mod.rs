//! Context reduction for the extraction stage: drop invisible or textless
//! nodes and every attribute, then minify.

mod minify;
mod stats;

pub use minify::minify;
pub use stats::{token_stats, CategorySummary, PageInput, StatsError, TokenStats};

use serde::{Deserialize, Serialize};

use crate::dom::{serialize, DomDocument, NodeId, NodeKind, HIDDEN_TEXT_TAGS};
use crate::text::ws_token_count;

/// Elements that never render.
pub const INVISIBLE_TAGS: &[&str] = &[
    "script", "style", "head", "meta", "link", "noscript", "template",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SanitizationReport {
    pub original_bytes: usize,
    pub sanitized_bytes: usize,
    pub minified_bytes: usize,
    /// `minified_bytes / original_bytes`, 0 for an empty original.
    pub ratio: f64,
    pub removed_nodes: usize,
    pub original_tokens: usize,
    pub minified_tokens: usize,
}

/// `style="display:none"` or `visibility:hidden`, compared without whitespace or case.
pub fn has_hiding_style(doc: &DomDocument, id: NodeId) -> bool {
    let Some(style) = doc.attr(id, "style") else {
        return false;
    };
    let compact: String = style
        .chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    compact.contains("display:none") || compact.contains("visibility:hidden")
}

fn has_visible_text(doc: &DomDocument, id: NodeId) -> bool {
    let mut stack = vec![id];
    while let Some(n) = stack.pop() {
        match doc.kind(n) {
            NodeKind::Text(t) => {
                if t.chars().any(|c| !c.is_whitespace()) {
                    return true;
                }
            }
            NodeKind::Comment(_) => {}
            NodeKind::Element(e) if HIDDEN_TEXT_TAGS.contains(&e.tag.as_str()) => {}
            _ => stack.extend(doc.children(n).iter().copied()),
        }
    }
    false
}

/// The removal predicate: an invisible element, a comment, or a node without visible text.
pub fn is_invisible_or_no_text(doc: &DomDocument, id: NodeId) -> bool {
    match doc.kind(id) {
        NodeKind::Comment(_) => true,
        NodeKind::Element(e) => {
            INVISIBLE_TAGS.contains(&e.tag.as_str())
                || has_hiding_style(doc, id)
                || !has_visible_text(doc, id)
        }
        NodeKind::Text(_) | NodeKind::Document => false,
    }
}

/// Returns a sanitized copy; `doc` keeps its attributes for later stages.
pub fn sanitize(doc: &DomDocument) -> DomDocument {
    let mut copy = doc.clone();
    sanitize_in_place(&mut copy);
    copy
}

/// Sanitizes `doc` in place and returns the number of removed nodes.
///
/// Nodes are first collected depth-first onto a second stack, then popped from
/// it so every child is judged before its parent; a wrapper whose only content
/// was removed becomes textless and goes next.
pub fn sanitize_in_place(doc: &mut DomDocument) -> usize {
    let root = doc.root();
    let mut left = vec![root];
    let mut right = Vec::new();
    while let Some(node) = left.pop() {
        right.push(node);
        left.extend(
            doc.children(node)
                .iter()
                .copied()
                .filter(|&c| !matches!(doc.kind(c), NodeKind::Text(_))),
        );
    }
    let mut removed = 0;
    while let Some(node) = right.pop() {
        if node != root && is_invisible_or_no_text(doc, node) {
            doc.remove(node);
            removed += 1;
        } else {
            doc.remove_attributes(node);
        }
    }
    doc.normalize_text();
    removed
}

/// Sanitizes, serializes and minifies one page, returning the context string and its report.
pub fn sanitize_and_minify(doc: &DomDocument) -> (String, SanitizationReport) {
    let original = serialize(doc);
    let original_bytes = if doc.byte_size > 0 {
        doc.byte_size
    } else {
        original.len()
    };
    let mut clean = doc.clone();
    let removed_nodes = sanitize_in_place(&mut clean);
    let sanitized = serialize(&clean);
    let minified = minify(&sanitized);
    let report = SanitizationReport {
        original_bytes,
        sanitized_bytes: sanitized.len(),
        minified_bytes: minified.len(),
        ratio: if original_bytes == 0 {
            0.0
        } else {
            minified.len() as f64 / original_bytes as f64
        },
        removed_nodes,
        original_tokens: ws_token_count(&original),
        minified_tokens: ws_token_count(&minified),
    };
    (minified, report)
}
