//! Target-centred page condensation for XPath programming.
//!
//! Every visible direct-text segment of every element is scored against each
//! target text; the closest element(s) per target are kept whole, with their
//! attributes. Their ancestor chain survives as a skeleton. Every other child
//! of a chain element becomes a stub (tag and attributes with `...` content),
//! so sibling structure and positional indices remain intact.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::dom::{DomDocument, NodeId, NodeKind, HIDDEN_TEXT_TAGS, VOID_TAGS};
use crate::static_xpath::generate_xpath;
use crate::text::normalize_ws;

pub const PLACEHOLDER: &str = "...";

/// Elements where the HTML parser would relocate stray text; they never receive a placeholder.
const NO_TEXT_CONTENT: &[&str] = &[
    "html", "head", "table", "thead", "tbody", "tfoot", "tr", "colgroup", "select", "frameset",
];

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum CondenseError {
    #[error("no non-empty target texts were given")]
    NoTargets,
}

/// The match decisions behind one condensation.
#[derive(Clone, Debug, PartialEq)]
pub struct CondensePlan<S> {
    pub target_texts: Vec<String>,
    /// Best distance per target; absent when the page has no text at all.
    pub distances: BTreeMap<String, S>,
    /// Absolute XPaths of every element tied at the best distance, per target.
    pub kept_xpaths: BTreeMap<String, Vec<String>>,
    pub kept: Vec<NodeId>,
}

/// Normalized text distance in `[0, 1]`.
///
/// Zero when the texts are equal after whitespace normalization or when `b`
/// occurs inside `a`; otherwise Levenshtein distance over the longer length.
pub fn default_distance(a: &str, b: &str) -> f64 {
    let a = normalize_ws(a);
    let b = normalize_ws(b);
    if a == b || (!b.is_empty() && a.contains(&b)) {
        return 0.0;
    }
    let longest = a.chars().count().max(b.chars().count());
    strsim::levenshtein(&a, &b) as f64 / longest as f64
}

/// Cheap lower bound of [`default_distance`] used to skip hopeless pairs.
fn length_bound(a_len: usize, b_len: usize) -> f64 {
    let longest = a_len.max(b_len);
    if longest == 0 {
        0.0
    } else {
        a_len.abs_diff(b_len) as f64 / longest as f64
    }
}

/// Elements with visible direct text, in document order, paired with each normalized segment.
pub fn iter_with_text(doc: &DomDocument) -> Vec<(NodeId, String)> {
    let mut out = Vec::new();
    let mut stack = vec![doc.root()];
    while let Some(n) = stack.pop() {
        let Some(tag) = doc.tag(n) else { continue };
        if HIDDEN_TEXT_TAGS.contains(&tag) {
            continue;
        }
        for &c in doc.children(n) {
            if let NodeKind::Text(t) = doc.kind(c) {
                let norm = normalize_ws(t);
                if !norm.is_empty() {
                    out.push((n, norm));
                }
            }
        }
        stack.extend(
            doc.children(n)
                .iter()
                .rev()
                .copied()
                .filter(|&c| doc.is_element(c)),
        );
    }
    out
}

fn clean_targets(targets: &[String]) -> Vec<String> {
    let mut seen = HashSet::new();
    targets
        .iter()
        .map(|t| normalize_ws(t))
        .filter(|t| !t.is_empty() && seen.insert(t.clone()))
        .collect()
}

/// Finds the best-matching elements for each target with an arbitrary distance.
pub fn plan_with<S, F>(
    doc: &DomDocument,
    targets: &[String],
    d: F,
) -> Result<CondensePlan<S>, CondenseError>
where
    S: PartialOrd + Copy,
    F: Fn(&str, &str) -> S,
{
    let targets = clean_targets(targets);
    if targets.is_empty() {
        return Err(CondenseError::NoTargets);
    }
    let segments = iter_with_text(doc);
    let mut best: Vec<Option<(S, Vec<NodeId>)>> = vec![None; targets.len()];
    for (ele, text) in &segments {
        for (ti, target) in targets.iter().enumerate() {
            let distance = d(text, target);
            match &mut best[ti] {
                // unseen targets start at +infinity
                None => best[ti] = Some((distance, vec![*ele])),
                Some((cur, eles)) => {
                    if distance < *cur {
                        *cur = distance;
                        *eles = vec![*ele];
                    } else if distance == *cur && eles.last() != Some(ele) {
                        eles.push(*ele);
                    }
                }
            }
        }
    }
    Ok(finish_plan(doc, targets, best))
}

fn finish_plan<S: Copy>(
    doc: &DomDocument,
    targets: Vec<String>,
    best: Vec<Option<(S, Vec<NodeId>)>>,
) -> CondensePlan<S> {
    let mut distances = BTreeMap::new();
    let mut kept_xpaths = BTreeMap::new();
    let mut kept = BTreeSet::new();
    for (t, b) in targets.iter().zip(best) {
        let Some((dist, eles)) = b else {
            kept_xpaths.insert(t.clone(), Vec::new());
            continue;
        };
        distances.insert(t.clone(), dist);
        let xps = eles
            .iter()
            .map(|&e| generate_xpath(doc, e).expect("matched element is attached"))
            .collect();
        kept_xpaths.insert(t.clone(), xps);
        kept.extend(eles);
    }
    CondensePlan {
        target_texts: targets,
        distances,
        kept_xpaths,
        kept: kept.into_iter().collect(),
    }
}

/// [`plan_with`] specialised to [`default_distance`], pruning pairs whose
/// length difference alone already exceeds the best distance found.
pub fn plan(doc: &DomDocument, targets: &[String]) -> Result<CondensePlan<f64>, CondenseError> {
    let targets = clean_targets(targets);
    if targets.is_empty() {
        return Err(CondenseError::NoTargets);
    }
    let target_lens: Vec<usize> = targets.iter().map(|t| t.chars().count()).collect();
    let segments = iter_with_text(doc);
    let mut best: Vec<Option<(f64, Vec<NodeId>)>> = vec![None; targets.len()];
    for (ele, text) in &segments {
        let text_len = text.chars().count();
        for (ti, target) in targets.iter().enumerate() {
            if let Some((cur, _)) = &best[ti] {
                let contains = text_len >= target_lens[ti] && text.contains(target.as_str());
                if !contains && length_bound(text_len, target_lens[ti]) > *cur {
                    continue;
                }
            }
            let distance = default_distance(text, target);
            match &mut best[ti] {
                None => best[ti] = Some((distance, vec![*ele])),
                Some((cur, eles)) => {
                    if distance < *cur {
                        *cur = distance;
                        *eles = vec![*ele];
                    } else if distance == *cur && eles.last() != Some(ele) {
                        eles.push(*ele);
                    }
                }
            }
        }
    }
    Ok(finish_plan(doc, targets, best))
}

/// Condenses the original (attribute-bearing) page around `targets`.
pub fn condense(
    doc: &DomDocument,
    targets: &[String],
) -> Result<(DomDocument, CondensePlan<f64>), CondenseError> {
    let plan = plan(doc, targets)?;
    Ok((build(doc, &plan.kept), plan))
}

/// Condenses with a caller-supplied distance function.
pub fn condense_with<S, F>(
    doc: &DomDocument,
    targets: &[String],
    d: F,
) -> Result<(DomDocument, CondensePlan<S>), CondenseError>
where
    S: PartialOrd + Copy,
    F: Fn(&str, &str) -> S,
{
    let plan = plan_with(doc, targets, d)?;
    Ok((build(doc, &plan.kept), plan))
}

/// Builds the condensed copy given the set of kept elements.
pub fn build(doc: &DomDocument, kept: &[NodeId]) -> DomDocument {
    let kept_set: HashSet<NodeId> = kept.iter().copied().collect();
    let mut chain: HashSet<NodeId> = HashSet::new();
    let mut kept_parents: HashSet<NodeId> = HashSet::new();
    for &k in kept {
        if let Some(p) = doc.parent(k) {
            kept_parents.insert(p);
        }
        for a in doc.ancestors(k) {
            if !chain.insert(a) {
                break;
            }
        }
    }
    let mut out = DomDocument::new();
    out.doctype = doc.doctype.clone();
    out.source_url = doc.source_url.clone();
    let ctx = Ctx {
        src: doc,
        kept: &kept_set,
        chain: &chain,
        kept_parents: &kept_parents,
    };
    let out_doc = out.document_node();
    for &c in doc.children(doc.document_node()) {
        ctx.copy_child(&mut out, out_doc, c);
    }
    out.normalize_text();
    out
}

struct Ctx<'a> {
    src: &'a DomDocument,
    kept: &'a HashSet<NodeId>,
    chain: &'a HashSet<NodeId>,
    kept_parents: &'a HashSet<NodeId>,
}

impl Ctx<'_> {
    fn copy_child(&self, out: &mut DomDocument, parent: NodeId, id: NodeId) {
        let src = self.src;
        match src.kind(id) {
            NodeKind::Comment(_) | NodeKind::Document => {}
            NodeKind::Text(t) => {
                if t.trim().is_empty() {
                    out.append_text(parent, " ");
                } else {
                    out.append_text(parent, t);
                }
            }
            NodeKind::Element(el) => {
                if self.kept.contains(&id) {
                    let n = out.import_subtree(src, id);
                    out.append_child(parent, n);
                } else if self.chain.contains(&id) {
                    let n = out.create_element(&el.tag, el.attrs.clone());
                    out.append_child(parent, n);
                    self.copy_chain_children(out, n, id);
                } else {
                    self.stub(out, parent, id);
                }
            }
        }
    }

    fn copy_chain_children(&self, out: &mut DomDocument, out_parent: NodeId, id: NodeId) {
        let kids = self.src.children(id);
        // stubs after the last chain child are collapsed into one placeholder,
        // except directly around kept elements where siblings give context
        let last_chain = kids
            .iter()
            .rposition(|k| self.chain.contains(k) || self.kept.contains(k));
        let collapse_tail = !self.kept_parents.contains(&id)
            && !self
                .src
                .tag(id)
                .is_some_and(|t| NO_TEXT_CONTENT.contains(&t));
        // a run of trailing elements separated only by whitespace shares one placeholder
        let mut in_run = false;
        for (i, &k) in kids.iter().enumerate() {
            let trailing = last_chain.is_none_or(|l| i > l);
            if collapse_tail && trailing && self.src.is_element(k) {
                if !in_run {
                    out.append_text(out_parent, PLACEHOLDER);
                    in_run = true;
                }
                continue;
            }
            match self.src.kind(k) {
                NodeKind::Element(_) => in_run = false,
                NodeKind::Text(t) if !t.trim().is_empty() => in_run = false,
                // whitespace inside a collapsed run adds nothing after the placeholder
                NodeKind::Text(_) if in_run => continue,
                _ => {}
            }
            self.copy_child(out, out_parent, k);
        }
    }

    fn stub(&self, out: &mut DomDocument, parent: NodeId, id: NodeId) {
        let el = self.src.element(id).expect("stub of an element");
        let n = out.create_element(&el.tag, el.attrs.clone());
        out.append_child(parent, n);
        if !VOID_TAGS.contains(&el.tag.as_str()) && !NO_TEXT_CONTENT.contains(&el.tag.as_str()) {
            out.append_text(n, PLACEHOLDER);
        }
    }
}
