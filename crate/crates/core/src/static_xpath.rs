//! Deterministic absolute XPaths enriched with `id`/`class` predicates.
//!
//! A path is built bottom-up, one step per ancestor. Each step prefers
//! `tag[@id='…']`, then `tag[@class='…']`, then `tag[k]`; attribute steps get an
//! extra `[k]` whenever the attribute alone is shared by a same-tag sibling.

use crate::dom::{DomDocument, NodeId, NodeKind};

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum StaticXPathError {
    #[error("node {0} is not attached to the document")]
    DetachedNode(usize),
    #[error("paths share no common prefix: {0} vs {1}")]
    NoCommonPrefix(String, String),
}

/// Quotes `v` as an XPath literal, or `None` when it contains both quote kinds.
pub fn quote_literal(v: &str) -> Option<String> {
    if !v.contains('\'') {
        Some(format!("'{v}'"))
    } else if !v.contains('"') {
        Some(format!("\"{v}\""))
    } else {
        None
    }
}

fn is_xpath_name(tag: &str) -> bool {
    let mut chars = tag.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Absolute XPath selecting exactly `node`.
pub fn generate_xpath(doc: &DomDocument, node: NodeId) -> Result<String, StaticXPathError> {
    if !doc.is_attached(node) {
        return Err(StaticXPathError::DetachedNode(node.0));
    }
    if node == doc.document_node() {
        return Ok("/".into());
    }
    let mut steps: Vec<String> = Vec::new();
    let mut cur = node;
    while cur != doc.document_node() {
        let parent = doc.parent(cur).expect("attached node has a parent");
        steps.push(step_for(doc, parent, cur));
        cur = parent;
    }
    steps.reverse();
    Ok(format!("/{}", steps.join("/")))
}

fn step_for(doc: &DomDocument, parent: NodeId, node: NodeId) -> String {
    let siblings = doc.children(parent);
    match doc.kind(node) {
        NodeKind::Text(_) | NodeKind::Comment(_) => {
            let text = matches!(doc.kind(node), NodeKind::Text(_));
            let k = siblings
                .iter()
                .take_while(|&&s| s != node)
                .filter(|&&s| {
                    if text {
                        matches!(doc.kind(s), NodeKind::Text(_))
                    } else {
                        matches!(doc.kind(s), NodeKind::Comment(_))
                    }
                })
                .count()
                + 1;
            if text {
                format!("text()[{k}]")
            } else {
                format!("comment()[{k}]")
            }
        }
        NodeKind::Element(el) => {
            let tag = el.tag.as_str();
            if !is_xpath_name(tag) {
                let k = siblings
                    .iter()
                    .take_while(|&&s| s != node)
                    .filter(|&&s| doc.is_element(s))
                    .count()
                    + 1;
                return format!("*[{k}]");
            }
            let same_tag: Vec<NodeId> = siblings
                .iter()
                .copied()
                .filter(|&s| doc.tag(s) == Some(tag))
                .collect();
            let at_top = parent == doc.document_node()
                || (doc.parent(parent) == Some(doc.document_node())
                    && matches!(tag, "head" | "body"));
            if at_top && same_tag.len() == 1 {
                return tag.to_string();
            }
            for key in ["id", "class"] {
                let Some(value) = doc.attr(node, key) else {
                    continue;
                };
                let Some(lit) = quote_literal(value) else {
                    continue;
                };
                let sharing: Vec<NodeId> = same_tag
                    .iter()
                    .copied()
                    .filter(|&s| doc.attr(s, key) == Some(value))
                    .collect();
                if sharing.len() == 1 {
                    return format!("{tag}[@{key}={lit}]");
                }
                let k = sharing.iter().position(|&s| s == node).unwrap() + 1;
                return format!("{tag}[@{key}={lit}][{k}]");
            }
            let k = same_tag.iter().position(|&s| s == node).unwrap() + 1;
            format!("{tag}[{k}]")
        }
        NodeKind::Document => String::new(),
    }
}

/// Splits an absolute path into its steps, honouring quotes and brackets.
fn split_steps(path: &str) -> Option<Vec<&str>> {
    let body = path.strip_prefix('/')?;
    if body.is_empty() || body.starts_with('/') {
        return None;
    }
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut quote: Option<char> = None;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '\'' | '"') => quote = Some(c),
            (None, '[') => depth += 1,
            (None, ']') => depth -= 1,
            (None, '/') if depth == 0 => {
                out.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&body[start..]);
    if out.iter().any(|s| s.is_empty()) {
        return None;
    }
    Some(out)
}

/// `tag[k]` with a plain positional predicate.
fn positional(step: &str) -> Option<(&str, usize)> {
    let (tag, rest) = step.split_once('[')?;
    let k = rest.strip_suffix(']')?.parse().ok()?;
    Some((tag, k))
}

/// Rewrites `target` as `anchor` followed by relative steps reaching the same node.
///
/// Both arguments are absolute paths in the [`generate_xpath`] dialect. Siblings
/// addressed positionally by the same tag become a `following-sibling::` or
/// `preceding-sibling::` step; otherwise the path climbs with `..` to the
/// deepest common ancestor and descends with the target's remaining steps.
pub fn relativize(target: &str, anchor: &str) -> Result<String, StaticXPathError> {
    let no_prefix = || StaticXPathError::NoCommonPrefix(target.to_string(), anchor.to_string());
    let t = split_steps(target).ok_or_else(no_prefix)?;
    let a = split_steps(anchor).ok_or_else(no_prefix)?;
    let common = t.iter().zip(&a).take_while(|(x, y)| x == y).count();
    if common == 0 {
        return Err(no_prefix());
    }
    if common == t.len() && common == a.len() {
        return Ok(format!("{anchor}/self::node()"));
    }
    let mut rel: Vec<String> = Vec::new();
    let mut rest_from = common;
    let sibling_pair = (common + 1 == a.len() && common < t.len())
        .then(|| positional(a[common]).zip(positional(t[common])))
        .flatten()
        .filter(|((at, _), (tt, _))| at == tt);
    if let Some(((tag, ak), (_, tk))) = sibling_pair {
        if tk > ak {
            rel.push(format!("following-sibling::{tag}[{}]", tk - ak));
        } else {
            rel.push(format!("preceding-sibling::{tag}[{}]", ak - tk));
        }
        rest_from = common + 1;
    } else {
        for _ in common..a.len() {
            rel.push("..".into());
        }
    }
    rel.extend(t[rest_from..].iter().map(|s| s.to_string()));
    Ok(format!("{anchor}/{}", rel.join("/")))
}
