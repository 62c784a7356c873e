//! Owned trees for the oracles, conversion to and from the arena, and
//! random attributed documents for property tests.

use proptest::prelude::*;
use xpath_agent::dom::{parse_str, serialize, DomDocument, NodeId, NodeKind};

#[derive(Clone, Debug, PartialEq)]
pub enum Tree {
    El {
        tag: String,
        attrs: Vec<(String, String)>,
        kids: Vec<Tree>,
    },
    Text(String),
    Comment(String),
}

impl Tree {
    pub fn el(tag: &str, attrs: Vec<(String, String)>, kids: Vec<Tree>) -> Tree {
        Tree::El {
            tag: tag.to_string(),
            attrs,
            kids,
        }
    }
}

pub fn from_dom(doc: &DomDocument, id: NodeId) -> Tree {
    match doc.kind(id) {
        NodeKind::Element(e) => Tree::El {
            tag: e.tag.clone(),
            attrs: e.attrs.clone(),
            kids: doc.children(id).iter().map(|&c| from_dom(doc, c)).collect(),
        },
        NodeKind::Text(t) => Tree::Text(t.clone()),
        NodeKind::Comment(c) => Tree::Comment(c.clone()),
        NodeKind::Document => panic!("document node has no tree form"),
    }
}

/// Appends `node` to `kids`, merging adjacent text and dropping empty text.
pub fn push_merged(kids: &mut Vec<Tree>, node: Tree) {
    if let Tree::Text(t) = &node {
        if t.is_empty() {
            return;
        }
        if let Some(Tree::Text(prev)) = kids.last_mut() {
            prev.push_str(t);
            return;
        }
    }
    kids.push(node);
}

fn append(doc: &mut DomDocument, parent: NodeId, t: &Tree) {
    let id = match t {
        Tree::El { tag, attrs, kids } => {
            let id = doc.create_element(tag, attrs.clone());
            for k in kids {
                append(doc, id, k);
            }
            id
        }
        Tree::Text(s) => doc.create_text(s),
        Tree::Comment(s) => doc.create_comment(s),
    };
    doc.append_child(parent, id);
}

/// A document whose top-level children are `top`.
pub fn to_dom(top: &[Tree], doctype: Option<String>) -> DomDocument {
    let mut doc = DomDocument::new();
    doc.doctype = doctype;
    let d = doc.document_node();
    for t in top {
        append(&mut doc, d, t);
    }
    doc
}

pub fn count_nodes(t: &Tree) -> usize {
    match t {
        Tree::El { kids, .. } => 1 + kids.iter().map(count_nodes).sum::<usize>(),
        _ => 1,
    }
}

const TAGS: &[&str] = &["div", "p", "span", "a", "b", "li"];
const WORDS: &[&str] = &["a", "b", "ab", "Price: 5", "12", "x y", "  ", "Brand", "7"];
const CLASSES: &[&str] = &["k", "item", "row big", "x"];

fn attrs_strategy() -> impl Strategy<Value = Vec<(String, String)>> {
    (
        proptest::option::weighted(0.2, 0..4usize),
        proptest::option::weighted(0.4, proptest::sample::select(CLASSES)),
    )
        .prop_map(|(id, class)| {
            let mut a = Vec::new();
            if let Some(i) = id {
                a.push(("id".to_string(), format!("n{i}")));
            }
            if let Some(c) = class {
                a.push(("class".to_string(), c.to_string()));
            }
            a
        })
}

fn leaf() -> impl Strategy<Value = Tree> {
    prop_oneof![
        3 => proptest::sample::select(WORDS).prop_map(|w| Tree::Text(w.to_string())),
        2 => (proptest::sample::select(TAGS), attrs_strategy())
            .prop_map(|(t, a)| Tree::el(t, a, Vec::new())),
    ]
}

/// Random element subtree with at most `depth` levels below it.
pub fn element(depth: u32, max_nodes: u32) -> impl Strategy<Value = Tree> {
    leaf()
        .prop_recursive(depth, max_nodes, 5, |inner| {
            (
                proptest::sample::select(TAGS),
                attrs_strategy(),
                proptest::collection::vec(inner, 1..5),
            )
                .prop_map(|(t, a, kids)| {
                    let mut merged = Vec::new();
                    for k in kids {
                        push_merged(&mut merged, k);
                    }
                    Tree::el(t, a, merged)
                })
        })
        .prop_map(|t| match t {
            el @ Tree::El { .. } => el,
            text => Tree::el("div", Vec::new(), vec![text]),
        })
}

/// `<html><body>…</body></html>` around random content, built in memory.
/// Nesting may be one the HTML parser would reflow (a `div` inside a `p`).
pub fn raw_document(depth: u32, max_nodes: u32) -> impl Strategy<Value = DomDocument> {
    proptest::collection::vec(element(depth, max_nodes / 2), 1..5).prop_map(|body| {
        let html = Tree::el(
            "html",
            Vec::new(),
            vec![
                Tree::el("head", Vec::new(), Vec::new()),
                Tree::el("body", Vec::new(), body),
            ],
        );
        to_dom(&[html], None)
    })
}

/// Like [`raw_document`], but passed through serialize and parse once so the
/// tree is exactly what the parser produces, capped at `max_nodes` nodes.
pub fn document(depth: u32, max_nodes: u32) -> impl Strategy<Value = DomDocument> {
    raw_document(depth, max_nodes)
        .prop_map(|d| parse_str(&serialize(&d)))
        .prop_filter("too many nodes", move |d| {
            d.all_nodes().count() <= max_nodes as usize
        })
}
