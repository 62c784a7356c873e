use super::{DomDocument, NodeId, NodeKind};

pub const VOID_TAGS: &[&str] = &[
    "area", "base", "basefont", "bgsound", "br", "col", "embed", "frame", "hr", "img", "input",
    "keygen", "link", "meta", "param", "source", "track", "wbr",
];

/// Elements whose text children are emitted without escaping.
pub const RAW_TEXT_TAGS: &[&str] = &[
    "style",
    "script",
    "xmp",
    "iframe",
    "noembed",
    "noframes",
    "plaintext",
    "noscript",
];

/// Serializes the whole document as UTF-8 HTML.
pub fn serialize(doc: &DomDocument) -> String {
    let mut out = String::new();
    if let Some(dt) = &doc.doctype {
        out.push_str("<!DOCTYPE ");
        out.push_str(dt);
        out.push('>');
    }
    for &c in doc.children(doc.document_node()) {
        write_node(doc, c, &mut out);
    }
    out
}

/// Outer HTML of a single subtree.
pub fn serialize_node(doc: &DomDocument, id: NodeId) -> String {
    let mut out = String::new();
    write_node(doc, id, &mut out);
    out
}

fn write_node(doc: &DomDocument, id: NodeId, out: &mut String) {
    match doc.kind(id) {
        NodeKind::Document => {
            for &c in doc.children(id) {
                write_node(doc, c, out);
            }
        }
        NodeKind::Comment(c) => {
            out.push_str("<!--");
            out.push_str(c);
            out.push_str("-->");
        }
        NodeKind::Text(t) => {
            let raw = doc
                .parent(id)
                .and_then(|p| doc.tag(p))
                .is_some_and(|tag| RAW_TEXT_TAGS.contains(&tag));
            if raw {
                out.push_str(t);
            } else {
                escape_text(t, out);
            }
        }
        NodeKind::Element(el) => {
            out.push('<');
            out.push_str(&el.tag);
            for (k, v) in &el.attrs {
                out.push(' ');
                out.push_str(k);
                out.push_str("=\"");
                escape_attr(v, out);
                out.push('"');
            }
            out.push('>');
            if VOID_TAGS.contains(&el.tag.as_str()) {
                return;
            }
            if matches!(el.tag.as_str(), "pre" | "textarea" | "listing") {
                let leading_nl = doc
                    .children(id)
                    .first()
                    .and_then(|&c| doc.text(c).filter(|_| !doc.is_element(c)))
                    .is_some_and(|t| t.starts_with('\n'));
                if leading_nl {
                    out.push('\n');
                }
            }
            for &c in doc.children(id) {
                write_node(doc, c, out);
            }
            out.push_str("</");
            out.push_str(&el.tag);
            out.push('>');
        }
    }
}

pub(crate) fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            _ => out.push(c),
        }
    }
}

pub(crate) fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            _ => out.push(c),
        }
    }
}
