//! Recursive reference sanitizer.
//!
//! Children are sanitized before their parent is judged, so a wrapper whose
//! whole content was removed is itself textless and goes too. The document
//! element always survives (attributes stripped).

use xpath_agent::dom::{serialize, DomDocument};
use xpath_agent::sanitizer::minify;

use super::trees::{from_dom, push_merged, to_dom, Tree};

const NEVER_RENDERED: &[&str] = &[
    "script", "style", "head", "meta", "link", "noscript", "template",
];
const TEXT_HIDING: &[&str] = &["script", "style", "template", "noscript", "head"];

fn hides(attrs: &[(String, String)]) -> bool {
    attrs.iter().any(|(k, v)| {
        if k != "style" {
            return false;
        }
        let squeezed: String = v
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_lowercase();
        squeezed.contains("display:none") || squeezed.contains("visibility:hidden")
    })
}

fn shows_text(t: &Tree) -> bool {
    match t {
        Tree::Text(s) => !s.trim().is_empty(),
        Tree::Comment(_) => false,
        Tree::El { tag, kids, .. } => {
            !TEXT_HIDING.contains(&tag.as_str()) && kids.iter().any(shows_text)
        }
    }
}

fn clean_kids(kids: &[Tree]) -> Vec<Tree> {
    let mut out = Vec::new();
    for k in kids {
        if let Some(c) = clean(k) {
            push_merged(&mut out, c);
        }
    }
    out
}

fn clean(t: &Tree) -> Option<Tree> {
    match t {
        Tree::Text(s) => Some(Tree::Text(s.clone())),
        Tree::Comment(_) => None,
        Tree::El { tag, attrs, kids } => {
            let kids = clean_kids(kids);
            let candidate = Tree::El {
                tag: tag.clone(),
                attrs: Vec::new(),
                kids,
            };
            let drop =
                NEVER_RENDERED.contains(&tag.as_str()) || hides(attrs) || !shows_text(&candidate);
            (!drop).then_some(candidate)
        }
    }
}

pub fn sanitize(doc: &DomDocument) -> DomDocument {
    let root = doc.root();
    let mut top = Vec::new();
    for &c in doc.children(doc.document_node()) {
        let node = if c == root {
            match from_dom(doc, c) {
                Tree::El { tag, kids, .. } => Tree::El {
                    tag,
                    attrs: Vec::new(),
                    kids: clean_kids(&kids),
                },
                other => other,
            }
        } else {
            from_dom(doc, c)
        };
        push_merged(&mut top, node);
    }
    to_dom(&top, doc.doctype.clone())
}

/// Oracle output in the same serialized form the extraction prompt receives.
pub fn sanitize_and_minify(doc: &DomDocument) -> String {
    minify(&serialize(&sanitize(doc)))
}
