//! Lossless-for-text HTML minification.
//!
//! Whitespace in ordinary text is collapsed so that the visible-text stream
//! never carries two spaces in a row or leading/trailing space; comments are
//! dropped, attribute quotes are removed where the value cannot be misread,
//! and an empty `<head>` is omitted (the parser re-creates it).

use crate::dom::{
    parse_str, DomDocument, NodeId, NodeKind, HIDDEN_TEXT_TAGS, RAW_TEXT_TAGS, VOID_TAGS,
};

const PRESERVE_WS_TAGS: &[&str] = &["pre", "textarea", "listing", "plaintext"];

pub fn minify(html: &str) -> String {
    let doc = parse_str(html);
    let mut m = Minifier {
        doc: &doc,
        out: String::with_capacity(html.len() / 2),
        // the visible stream starts "after whitespace" so leading space is dropped
        last_was_space: true,
        pending_space_at: None,
    };
    if let Some(dt) = &doc.doctype {
        m.out.push_str("<!doctype ");
        m.out.push_str(dt);
        m.out.push('>');
    }
    for &c in doc.children(doc.document_node()) {
        m.node(c, false, false);
    }
    if let Some(at) = m.pending_space_at {
        m.out.remove(at);
    }
    m.out
}

struct Minifier<'d> {
    doc: &'d DomDocument,
    out: String,
    last_was_space: bool,
    /// Byte offset of a trailing collapsed space in the visible stream, if the
    /// stream currently ends with one.
    pending_space_at: Option<usize>,
}

impl Minifier<'_> {
    fn node(&mut self, id: NodeId, hidden: bool, preserve: bool) {
        match self.doc.kind(id) {
            NodeKind::Document => {}
            NodeKind::Comment(_) => {}
            NodeKind::Text(t) => {
                let raw = self
                    .doc
                    .parent(id)
                    .and_then(|p| self.doc.tag(p))
                    .is_some_and(|tag| RAW_TEXT_TAGS.contains(&tag));
                if raw {
                    self.out.push_str(t);
                    if !hidden {
                        self.note_raw(t);
                    }
                } else if preserve {
                    crate::dom::serialize::escape_text(t, &mut self.out);
                    if !hidden {
                        self.note_raw(t);
                    }
                } else if hidden {
                    let collapsed = crate::text::normalize_ws(t);
                    crate::dom::serialize::escape_text(&collapsed, &mut self.out);
                } else {
                    self.collapsed_text(t);
                }
            }
            NodeKind::Element(el) => {
                let tag = el.tag.as_str();
                if tag == "head" && el.attrs.is_empty() && self.doc.children(id).is_empty() {
                    return;
                }
                self.out.push('<');
                self.out.push_str(tag);
                for (k, v) in &el.attrs {
                    self.out.push(' ');
                    self.out.push_str(k);
                    if v.is_empty() {
                        continue;
                    }
                    self.out.push('=');
                    if can_unquote(v) {
                        self.out.push_str(v);
                    } else {
                        self.out.push('"');
                        crate::dom::serialize::escape_attr(v, &mut self.out);
                        self.out.push('"');
                    }
                }
                self.out.push('>');
                if VOID_TAGS.contains(&tag) {
                    return;
                }
                let hidden = hidden || HIDDEN_TEXT_TAGS.contains(&tag);
                let preserve = preserve || PRESERVE_WS_TAGS.contains(&tag);
                if PRESERVE_WS_TAGS.contains(&tag) {
                    let leading_nl = self
                        .doc
                        .children(id)
                        .first()
                        .and_then(|&c| match self.doc.kind(c) {
                            NodeKind::Text(t) => Some(t.starts_with('\n')),
                            _ => None,
                        })
                        .unwrap_or(false);
                    if leading_nl {
                        self.out.push('\n');
                    }
                }
                for &c in self.doc.children(id) {
                    self.node(c, hidden, preserve);
                }
                self.out.push_str("</");
                self.out.push_str(tag);
                self.out.push('>');
            }
        }
    }

    fn note_raw(&mut self, t: &str) {
        if let Some(last) = t.chars().last() {
            self.last_was_space = last.is_whitespace();
            self.pending_space_at = None;
        }
    }

    fn collapsed_text(&mut self, t: &str) {
        let mut buf = String::with_capacity(t.len());
        for c in t.chars() {
            if c.is_whitespace() {
                if !self.last_was_space {
                    self.pending_space_at = Some(self.out.len() + escaped_len(&buf));
                    buf.push(' ');
                    self.last_was_space = true;
                }
            } else {
                buf.push(c);
                self.last_was_space = false;
                self.pending_space_at = None;
            }
        }
        crate::dom::serialize::escape_text(&buf, &mut self.out);
    }
}

fn escaped_len(s: &str) -> usize {
    let mut tmp = String::new();
    crate::dom::serialize::escape_text(s, &mut tmp);
    tmp.len()
}

fn can_unquote(v: &str) -> bool {
    !v.is_empty()
        && v.chars().all(|c| {
            !c.is_whitespace() && !matches!(c, '"' | '\'' | '=' | '<' | '>' | '`' | '&' | '\u{a0}')
        })
}
