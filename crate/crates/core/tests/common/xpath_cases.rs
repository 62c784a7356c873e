//! Randomized library-versus-oracle XPath comparison, shared by the engine
//! tests and the acceptance suite.

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use xpath_agent::dom::{serialize, DomDocument};
use xpath_agent::xpath::{evaluate, parse_xpath};

use super::trees;
use super::xpath_oracle::{same_result, ExprGen, Oracle};

pub const MAX_NODES: u32 = 50;
pub const MAX_DEPTH: u32 = 4;

#[derive(Debug, Default)]
pub struct Agreement {
    pub cases: usize,
    /// Cases where both evaluators produced a value (rather than both failing).
    pub valued: usize,
    /// Cases whose value was a non-empty node-set.
    pub non_empty: usize,
    pub disagreements: Vec<String>,
}

/// Checks one expression on one document; `Err` describes a disagreement.
pub fn compare(doc: &DomDocument, src: &str) -> Result<Option<bool>, String> {
    let expr = parse_xpath(src).map_err(|e| format!("{src}: library rejected generated expression: {e}"))?;
    let lib = evaluate(doc, &expr);
    let oracle = Oracle::new(doc).evaluate(&expr);
    match (lib, oracle) {
        (Ok(a), Ok(b)) if same_result(&a, &b) => {
            Ok(Some(matches!(a, xpath_agent::xpath::XPathResult::NodeSet(ref n) if !n.is_empty())))
        }
        (Err(_), Err(_)) => Ok(None),
        (a, b) => Err(format!("{src}\n  on {}\n  library {a:?}\n  oracle  {b:?}", serialize(doc))),
    }
}

/// Runs `cases` deterministic (document, expression) pairs.
pub fn run(cases: usize, seed: u64) -> Agreement {
    let mut runner = TestRunner::deterministic();
    let docs = trees::document(MAX_DEPTH, MAX_NODES);
    let mut gen = ExprGen::new(seed);
    let mut out = Agreement::default();
    let mut doc = None;
    for i in 0..cases {
        // a handful of expressions per document keeps generation cheap
        if i % 4 == 0 {
            doc = Some(docs.new_tree(&mut runner).expect("document strategy").current());
        }
        let doc = doc.as_ref().unwrap();
        assert!(doc.all_nodes().count() <= MAX_NODES as usize);
        let src = gen.expr(MAX_DEPTH);
        out.cases += 1;
        match compare(doc, &src) {
            Ok(Some(non_empty)) => {
                out.valued += 1;
                out.non_empty += usize::from(non_empty);
            }
            Ok(None) => {}
            Err(e) => out.disagreements.push(e),
        }
    }
    out
}
