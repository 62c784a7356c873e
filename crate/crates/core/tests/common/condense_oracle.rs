//! Exhaustive-pairing reference condenser.
//!
//! Every (element, direct text segment) pair is scored against every target
//! with a plain dynamic-programming edit distance; no pruning. The output is
//! rebuilt recursively from the kept set.

use std::collections::HashSet;

use xpath_agent::dom::{DomDocument, NodeId, NodeKind};

use super::trees::{from_dom, push_merged, to_dom, Tree};

const TEXT_HIDING: &[&str] = &["script", "style", "template", "noscript", "head"];
const VOID: &[&str] = &[
    "area", "base", "basefont", "bgsound", "br", "col", "embed", "frame", "hr", "img", "input",
    "keygen", "link", "meta", "param", "source", "track", "wbr",
];
const NO_TEXT: &[&str] = &[
    "html", "head", "table", "thead", "tbody", "tfoot", "tr", "colgroup", "select", "frameset",
];
const DOTS: &str = "...";

fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        table[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            table[i][j] = sub.min(table[i - 1][j] + 1).min(table[i][j - 1] + 1);
        }
    }
    table[a.len()][b.len()]
}

pub fn distance(segment: &str, target: &str) -> f64 {
    let (s, t) = (squash(segment), squash(target));
    if s == t || (!t.is_empty() && s.contains(&t)) {
        return 0.0;
    }
    let longest = s.chars().count().max(t.chars().count());
    edit_distance(&s, &t) as f64 / longest as f64
}

fn segments(doc: &DomDocument, id: NodeId, out: &mut Vec<(NodeId, String)>) {
    let Some(tag) = doc.tag(id) else { return };
    if TEXT_HIDING.contains(&tag) {
        return;
    }
    for &c in doc.children(id) {
        match doc.kind(c) {
            NodeKind::Text(t) if !squash(t).is_empty() => out.push((id, squash(t))),
            NodeKind::Element(_) => segments(doc, c, out),
            _ => {}
        }
    }
}

/// Elements owning a segment at the minimum distance of some target.
pub fn kept_elements(doc: &DomDocument, targets: &[String]) -> HashSet<NodeId> {
    let mut targets_clean: Vec<String> = Vec::new();
    for t in targets {
        let t = squash(t);
        if !t.is_empty() && !targets_clean.contains(&t) {
            targets_clean.push(t);
        }
    }
    let mut segs = Vec::new();
    segments(doc, doc.root(), &mut segs);
    let mut kept = HashSet::new();
    for t in &targets_clean {
        let scored: Vec<(NodeId, f64)> = segs.iter().map(|(e, s)| (*e, distance(s, t))).collect();
        let Some(min) = scored
            .iter()
            .map(|x| x.1)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
        else {
            continue;
        };
        kept.extend(scored.iter().filter(|x| x.1 == min).map(|x| x.0));
    }
    kept
}

struct Builder<'a> {
    doc: &'a DomDocument,
    kept: &'a HashSet<NodeId>,
    chain: HashSet<NodeId>,
    kept_parents: HashSet<NodeId>,
}

impl Builder<'_> {
    fn node(&self, id: NodeId) -> Option<Tree> {
        let doc = self.doc;
        match doc.kind(id) {
            NodeKind::Comment(_) | NodeKind::Document => None,
            NodeKind::Text(t) if t.trim().is_empty() => Some(Tree::Text(" ".into())),
            NodeKind::Text(t) => Some(Tree::Text(t.clone())),
            NodeKind::Element(_) if self.kept.contains(&id) => Some(from_dom(doc, id)),
            NodeKind::Element(e) if self.chain.contains(&id) => Some(Tree::El {
                tag: e.tag.clone(),
                attrs: e.attrs.clone(),
                kids: self.chain_kids(id),
            }),
            NodeKind::Element(e) => {
                let tag = e.tag.as_str();
                let kids = if VOID.contains(&tag) || NO_TEXT.contains(&tag) {
                    Vec::new()
                } else {
                    vec![Tree::Text(DOTS.into())]
                };
                Some(Tree::El {
                    tag: e.tag.clone(),
                    attrs: e.attrs.clone(),
                    kids,
                })
            }
        }
    }

    fn chain_kids(&self, id: NodeId) -> Vec<Tree> {
        let doc = self.doc;
        let kids = doc.children(id);
        let last_anchor = kids
            .iter()
            .rposition(|k| self.chain.contains(k) || self.kept.contains(k));
        let may_collapse =
            !self.kept_parents.contains(&id) && !NO_TEXT.contains(&doc.tag(id).unwrap_or(""));
        let mut out = Vec::new();
        let mut dots_open = false;
        for (i, &k) in kids.iter().enumerate() {
            let after_anchor = match last_anchor {
                Some(l) => i > l,
                None => true,
            };
            let is_element = doc.is_element(k);
            if may_collapse && after_anchor && is_element {
                if !dots_open {
                    push_merged(&mut out, Tree::Text(DOTS.into()));
                }
                dots_open = true;
                continue;
            }
            let visible = match doc.kind(k) {
                NodeKind::Text(t) => !t.trim().is_empty(),
                NodeKind::Element(_) => true,
                _ => false,
            };
            if visible {
                dots_open = false;
            } else if dots_open && matches!(doc.kind(k), NodeKind::Text(_)) {
                continue;
            }
            if let Some(t) = self.node(k) {
                push_merged(&mut out, t);
            }
        }
        out
    }
}

/// Kept elements whole, their ancestors as a skeleton, everything else stubbed.
pub fn build(doc: &DomDocument, kept: &HashSet<NodeId>) -> DomDocument {
    let mut chain = HashSet::new();
    let mut kept_parents = HashSet::new();
    for &k in kept {
        let mut cur = doc.parent(k);
        if let Some(p) = cur {
            kept_parents.insert(p);
        }
        while let Some(p) = cur {
            chain.insert(p);
            cur = doc.parent(p);
        }
    }
    let b = Builder {
        doc,
        kept,
        chain,
        kept_parents,
    };
    let mut top = Vec::new();
    for &c in doc.children(doc.document_node()) {
        if let Some(t) = b.node(c) {
            push_merged(&mut top, t);
        }
    }
    to_dom(&top, doc.doctype.clone())
}

pub fn condense(doc: &DomDocument, targets: &[String]) -> DomDocument {
    build(doc, &kept_elements(doc, targets))
}
