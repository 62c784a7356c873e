//! XPath subset: the location-path language plus the string toolbox the
//! programming prompt offers (`contains`, `starts-with`, `ends-with`,
//! `substring-before`, `substring-after`, `normalize-space`, positional
//! predicates with `position()`/`last()`, and `not`).
//!
//! Anything else is rejected by [`parse_xpath`], so an unsupported query is
//! reported the same way as a malformed one.

mod ast;
mod eval;
mod parser;

pub use ast::{Axis, CmpOp, Expr, Function, LocationPath, NodeTest, Step, XPathExpr};
pub use eval::{string_to_number, EvaluationError, XNode, XPathContext, XPathResult};
pub use parser::{parse_xpath, SyntaxError};

use crate::dom::DomDocument;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum XPathError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}

/// Evaluates `expr` against `doc` with the document node as context.
pub fn evaluate(doc: &DomDocument, expr: &XPathExpr) -> Result<XPathResult, EvaluationError> {
    XPathContext::new(doc).evaluate(expr)
}

/// Parses and evaluates in one go, returning the selected values as strings.
///
/// Node-sets yield one string-value per node; scalar results yield a single
/// string (numbers and booleans are rendered the XPath way).
pub fn select_strings(doc: &DomDocument, expr: &str) -> Result<Vec<String>, XPathError> {
    let parsed = parse_xpath(expr)?;
    let cx = XPathContext::new(doc);
    Ok(result_strings(&cx, &cx.evaluate(&parsed)?))
}

pub fn result_strings(cx: &XPathContext<'_>, r: &XPathResult) -> Vec<String> {
    match r {
        XPathResult::NodeSet(nodes) => nodes.iter().map(|&n| cx.string_value(n)).collect(),
        XPathResult::String(s) => vec![s.clone()],
        XPathResult::Number(n) => vec![n.to_string()],
        XPathResult::Boolean(b) => vec![b.to_string()],
    }
}
