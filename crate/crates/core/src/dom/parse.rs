use std::rc::Rc;

use html5ever::tendril::TendrilSink;
use markup5ever_rcdom::{Handle, NodeData, RcDom};

use super::{DomDocument, DomError, NodeId};

/// Parses raw page bytes with error recovery.
///
/// Input is decoded as UTF-8 (BOM honoured); otherwise the charset declared in
/// the first kilobyte (`<meta charset>` or `content="...; charset=..."`) is used.
pub fn parse_html(bytes: &[u8]) -> Result<DomDocument, DomError> {
    let text = decode(bytes)?;
    let mut doc = parse_str(&text);
    doc.byte_size = bytes.len();
    Ok(doc)
}

/// Parses an already-decoded string.
pub fn parse_str(html: &str) -> DomDocument {
    let dom = html5ever::parse_document(RcDom::default(), Default::default()).one(html);
    let mut doc = DomDocument::new();
    doc.byte_size = html.len();
    convert(&dom.document, &mut doc);
    doc
}

fn decode(bytes: &[u8]) -> Result<String, DomError> {
    if let Some((enc, bom_len)) = encoding_rs::Encoding::for_bom(bytes) {
        return enc
            .decode_without_bom_handling_and_without_replacement(&bytes[bom_len..])
            .map(|c| c.into_owned())
            .ok_or(DomError::UndecodableInput);
    }
    if let Ok(s) = std::str::from_utf8(bytes) {
        return Ok(s.to_string());
    }
    let enc = sniff_charset(bytes).ok_or(DomError::UndecodableInput)?;
    enc.decode_without_bom_handling_and_without_replacement(bytes)
        .map(|c| c.into_owned())
        .ok_or(DomError::UndecodableInput)
}

fn sniff_charset(bytes: &[u8]) -> Option<&'static encoding_rs::Encoding> {
    let head = &bytes[..bytes.len().min(1024)];
    let lower: Vec<u8> = head.iter().map(|b| b.to_ascii_lowercase()).collect();
    let needle = b"charset=";
    let pos = lower.windows(needle.len()).position(|w| w == needle)?;
    let rest = &lower[pos + needle.len()..];
    let rest = rest
        .strip_prefix(b"\"")
        .or_else(|| rest.strip_prefix(b"'"))
        .unwrap_or(rest);
    let end = rest
        .iter()
        .position(|b| !(b.is_ascii_alphanumeric() || *b == b'-' || *b == b'_'))
        .unwrap_or(rest.len());
    encoding_rs::Encoding::for_label(&rest[..end])
}

fn convert(document: &Handle, doc: &mut DomDocument) {
    let mut stack: Vec<(Handle, NodeId)> = Vec::new();
    for child in document.children.borrow().iter() {
        stack.push((Rc::clone(child), doc.document_node()));
    }
    // children are pushed in reverse so they pop in document order
    stack.reverse();
    while let Some((handle, parent)) = stack.pop() {
        match &handle.data {
            NodeData::Doctype { name, .. } => {
                doc.doctype = Some(name.to_string());
            }
            NodeData::Text { contents } => {
                doc.append_text(parent, &contents.borrow());
            }
            NodeData::Comment { contents } => {
                let c = doc.create_comment(contents);
                doc.append_child(parent, c);
            }
            NodeData::Element {
                name,
                attrs,
                template_contents,
                ..
            } => {
                let attrs = attrs
                    .borrow()
                    .iter()
                    .map(|a| {
                        let local = a.name.local.to_string();
                        let key = match &a.name.prefix {
                            Some(p) => format!("{p}:{local}"),
                            None => local,
                        };
                        (key, a.value.to_string())
                    })
                    .collect();
                let el = doc.create_element(&name.local, attrs);
                doc.append_child(parent, el);
                let kids: Vec<Handle> = match template_contents.borrow().as_ref() {
                    Some(frag) => frag.children.borrow().clone(),
                    None => handle.children.borrow().clone(),
                };
                for k in kids.into_iter().rev() {
                    stack.push((k, el));
                }
            }
            NodeData::Document | NodeData::ProcessingInstruction { .. } => {}
        }
    }
}
