//! Arena-backed HTML tree.
//!
//! Every node lives in a single `Vec` owned by [`DomDocument`] and is addressed
//! by a [`NodeId`]. Ids are never reused: removing a node detaches it (and its
//! subtree) but leaves the slot in place, so ids held elsewhere stay valid.
//!
//! Text is stored as child nodes of kind [`NodeKind::Text`], interleaved with
//! element children in document order. That gives `text()[n]` a well-defined
//! meaning and keeps the owning element of every text segment one hop away.

mod parse;
pub(crate) mod serialize;

pub use parse::{parse_html, parse_str};
pub use serialize::{serialize, serialize_node, RAW_TEXT_TAGS, VOID_TAGS};

use crate::text::normalize_ws;

/// Stable handle to a node within one [`DomDocument`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub tag: String,
    /// Attribute order is preserved as parsed.
    pub attrs: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Document,
    Element(Element),
    Text(String),
    Comment(String),
}

#[derive(Clone, Debug)]
struct Slot {
    kind: NodeKind,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
}

#[derive(thiserror::Error, Debug)]
pub enum DomError {
    #[error("input is not valid UTF-8 and declares no usable encoding")]
    UndecodableInput,
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Tags whose content never contributes to visible text.
pub const HIDDEN_TEXT_TAGS: &[&str] = &["script", "style", "template", "noscript", "head"];

#[derive(Clone, Debug)]
pub struct DomDocument {
    slots: Vec<Slot>,
    pub doctype: Option<String>,
    pub source_url: Option<String>,
    /// Size of the original serialized input in bytes.
    pub byte_size: usize,
}

impl Default for DomDocument {
    fn default() -> Self {
        Self::new()
    }
}

impl DomDocument {
    /// An empty document holding only the document node.
    pub fn new() -> Self {
        DomDocument {
            slots: vec![Slot {
                kind: NodeKind::Document,
                parent: None,
                children: Vec::new(),
            }],
            doctype: None,
            source_url: None,
            byte_size: 0,
        }
    }

    /// The document node (parent of the document element).
    pub fn document_node(&self) -> NodeId {
        NodeId(0)
    }

    /// The document element, normally `<html>`.
    pub fn root(&self) -> NodeId {
        self.children(self.document_node())
            .iter()
            .copied()
            .find(|&c| self.is_element(c))
            .unwrap_or(self.document_node())
    }

    /// Number of slots ever allocated, including detached nodes.
    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.slots[id.0].kind
    }

    pub fn element(&self, id: NodeId) -> Option<&Element> {
        match &self.slots[id.0].kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn element_mut(&mut self, id: NodeId) -> Option<&mut Element> {
        match &mut self.slots[id.0].kind {
            NodeKind::Element(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_element(&self, id: NodeId) -> bool {
        matches!(self.slots[id.0].kind, NodeKind::Element(_))
    }

    pub fn tag(&self, id: NodeId) -> Option<&str> {
        self.element(id).map(|e| e.tag.as_str())
    }

    pub fn attr(&self, id: NodeId, name: &str) -> Option<&str> {
        self.element(id)?
            .attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    /// Raw text of a text or comment node.
    pub fn text(&self, id: NodeId) -> Option<&str> {
        match &self.slots[id.0].kind {
            NodeKind::Text(t) | NodeKind::Comment(t) => Some(t),
            _ => None,
        }
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.slots[id.0].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.slots[id.0].children
    }

    pub fn element_children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.children(id)
            .iter()
            .copied()
            .filter(|&c| self.is_element(c))
    }

    /// The text segments directly owned by `id`, in order.
    pub fn direct_text(&self, id: NodeId) -> Vec<&str> {
        self.children(id)
            .iter()
            .filter_map(|&c| match &self.slots[c.0].kind {
                NodeKind::Text(t) => Some(t.as_str()),
                _ => None,
            })
            .collect()
    }

    /// True when `id` is reachable from the document node.
    pub fn is_attached(&self, id: NodeId) -> bool {
        let mut cur = id;
        loop {
            if cur == self.document_node() {
                return true;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Ancestors of `id`, nearest first, excluding `id` itself.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&n| self.parent(n))
    }

    /// Pre-order traversal of the subtree rooted at `id` (inclusive).
    pub fn descendants(&self, id: NodeId) -> Descendants<'_> {
        Descendants {
            doc: self,
            stack: vec![id],
        }
    }

    /// All attached nodes in document order, starting with the document node.
    pub fn all_nodes(&self) -> Descendants<'_> {
        self.descendants(self.document_node())
    }

    fn alloc(&mut self, kind: NodeKind) -> NodeId {
        self.slots.push(Slot {
            kind,
            parent: None,
            children: Vec::new(),
        });
        NodeId(self.slots.len() - 1)
    }

    pub fn create_element(&mut self, tag: &str, attrs: Vec<(String, String)>) -> NodeId {
        self.alloc(NodeKind::Element(Element {
            tag: tag.to_string(),
            attrs,
        }))
    }

    pub fn create_text(&mut self, text: &str) -> NodeId {
        self.alloc(NodeKind::Text(text.to_string()))
    }

    pub fn create_comment(&mut self, text: &str) -> NodeId {
        self.alloc(NodeKind::Comment(text.to_string()))
    }

    /// Appends a detached node as the last child of `parent`.
    pub fn append_child(&mut self, parent: NodeId, child: NodeId) {
        debug_assert!(self.slots[child.0].parent.is_none());
        self.slots[child.0].parent = Some(parent);
        self.slots[parent.0].children.push(child);
    }

    /// Appends text to `parent`, merging with a trailing text child if present.
    pub fn append_text(&mut self, parent: NodeId, text: &str) {
        if let Some(&last) = self.slots[parent.0].children.last() {
            if let NodeKind::Text(t) = &mut self.slots[last.0].kind {
                t.push_str(text);
                return;
            }
        }
        let t = self.create_text(text);
        self.append_child(parent, t);
    }

    /// Detaches `id` (with its subtree) from its parent. The slot and ids stay valid.
    pub fn remove(&mut self, id: NodeId) {
        if let Some(p) = self.slots[id.0].parent.take() {
            self.slots[p.0].children.retain(|&c| c != id);
        }
    }

    /// Detaches every child of `id`.
    pub fn remove_children(&mut self, id: NodeId) {
        let kids = std::mem::take(&mut self.slots[id.0].children);
        for k in kids {
            self.slots[k.0].parent = None;
        }
    }

    pub fn remove_attributes(&mut self, id: NodeId) {
        if let Some(e) = self.element_mut(id) {
            e.attrs.clear();
        }
    }

    pub fn set_text(&mut self, id: NodeId, text: &str) {
        if let NodeKind::Text(t) | NodeKind::Comment(t) = &mut self.slots[id.0].kind {
            *t = text.to_string();
        }
    }

    /// Merges adjacent text children and drops empty text nodes throughout the tree.
    ///
    /// Detaching an element between two text nodes leaves them adjacent, which a
    /// re-parse would fold into one; normalizing keeps the tree in that canonical form.
    pub fn normalize_text(&mut self) {
        let order: Vec<NodeId> = self.all_nodes().collect();
        for id in order {
            let kids = std::mem::take(&mut self.slots[id.0].children);
            let mut merged: Vec<NodeId> = Vec::with_capacity(kids.len());
            for k in kids {
                let is_text = matches!(self.slots[k.0].kind, NodeKind::Text(_));
                if is_text {
                    if let NodeKind::Text(t) = &self.slots[k.0].kind {
                        if t.is_empty() {
                            self.slots[k.0].parent = None;
                            continue;
                        }
                    }
                    if let Some(&prev) = merged.last() {
                        if let NodeKind::Text(_) = self.slots[prev.0].kind {
                            let add = match &self.slots[k.0].kind {
                                NodeKind::Text(t) => t.clone(),
                                _ => unreachable!(),
                            };
                            if let NodeKind::Text(p) = &mut self.slots[prev.0].kind {
                                p.push_str(&add);
                            }
                            self.slots[k.0].parent = None;
                            continue;
                        }
                    }
                }
                merged.push(k);
            }
            self.slots[id.0].children = merged;
        }
    }

    /// Whitespace-normalized visible text of the subtree at `id`.
    pub fn visible_text(&self, id: NodeId) -> String {
        normalize_ws(&self.raw_visible_text(id))
    }

    /// Concatenation of visible text nodes below `id`, without normalization.
    pub fn raw_visible_text(&self, id: NodeId) -> String {
        let mut out = String::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            match &self.slots[n.0].kind {
                NodeKind::Text(t) => out.push_str(t),
                NodeKind::Comment(_) => {}
                NodeKind::Element(e) if HIDDEN_TEXT_TAGS.contains(&e.tag.as_str()) => {}
                NodeKind::Element(_) | NodeKind::Document => {
                    stack.extend(self.slots[n.0].children.iter().rev().copied());
                }
            }
        }
        out
    }

    /// Copies the subtree at `id` of `src` into `self` as a new detached node.
    pub fn import_subtree(&mut self, src: &DomDocument, id: NodeId) -> NodeId {
        let new = self.alloc(src.kind(id).clone());
        for &c in src.children(id) {
            let nc = self.import_subtree(src, c);
            self.append_child(new, nc);
        }
        new
    }
}

pub struct Descendants<'a> {
    doc: &'a DomDocument,
    stack: Vec<NodeId>,
}

impl Iterator for Descendants<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let n = self.stack.pop()?;
        self.stack
            .extend(self.doc.children(n).iter().rev().copied());
        Some(n)
    }
}

/// Structural equality: kinds, tags, attributes (ordered) and text, ignoring node ids.
///
/// Adjacent text nodes are compared as if merged, and empty text nodes are ignored.
pub fn structurally_equal(a: &DomDocument, b: &DomDocument) -> bool {
    a.doctype == b.doctype && subtree_equal(a, a.document_node(), b, b.document_node())
}

pub fn subtree_equal(a: &DomDocument, an: NodeId, b: &DomDocument, bn: NodeId) -> bool {
    if !shallow_equal(a.kind(an), b.kind(bn)) {
        return false;
    }
    let ca = canonical_children(a, an);
    let cb = canonical_children(b, bn);
    if ca.len() != cb.len() {
        return false;
    }
    ca.iter().zip(&cb).all(|(x, y)| match (x, y) {
        (Child::Text(s), Child::Text(t)) => s == t,
        (Child::Node(x), Child::Node(y)) => subtree_equal(a, *x, b, *y),
        _ => false,
    })
}

fn shallow_equal(a: &NodeKind, b: &NodeKind) -> bool {
    match (a, b) {
        (NodeKind::Document, NodeKind::Document) => true,
        (NodeKind::Element(x), NodeKind::Element(y)) => x == y,
        (NodeKind::Comment(x), NodeKind::Comment(y)) => x == y,
        (NodeKind::Text(_), NodeKind::Text(_)) => true,
        _ => false,
    }
}

enum Child {
    Text(String),
    Node(NodeId),
}

fn canonical_children(doc: &DomDocument, id: NodeId) -> Vec<Child> {
    let mut out: Vec<Child> = Vec::new();
    for &c in doc.children(id) {
        match doc.kind(c) {
            NodeKind::Text(t) if t.is_empty() => {}
            NodeKind::Text(t) => {
                if let Some(Child::Text(prev)) = out.last_mut() {
                    prev.push_str(t);
                } else {
                    out.push(Child::Text(t.clone()));
                }
            }
            _ => out.push(Child::Node(c)),
        }
    }
    out
}
