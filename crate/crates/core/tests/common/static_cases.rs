//! Uniqueness of generated absolute paths over random attributed trees,
//! checked with both the library engine and the brute-force oracle.

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use xpath_agent::dom::{serialize, DomDocument, NodeId};
use xpath_agent::static_xpath::generate_xpath;
use xpath_agent::xpath::{evaluate, parse_xpath, XNode, XPathResult};

use super::trees;
use super::xpath_oracle::Oracle;

#[derive(Debug, Default)]
pub struct Uniqueness {
    pub trees: usize,
    pub nodes: usize,
    pub failures: Vec<String>,
}

/// Failure description when `xp` does not select exactly `node` in `doc`.
pub fn selects_exactly(doc: &DomDocument, xp: &str, node: NodeId) -> Result<(), String> {
    let expr = parse_xpath(xp).map_err(|e| format!("{xp}: {e}"))?;
    let want = XPathResult::NodeSet(vec![XNode::Node(node)]);
    let lib = evaluate(doc, &expr).map_err(|e| format!("{xp}: {e}"))?;
    let oracle = Oracle::new(doc).evaluate(&expr).map_err(|_| format!("{xp}: oracle failed"))?;
    if lib != want || oracle != want {
        return Err(format!("{xp} on {}: library {lib:?}, oracle {oracle:?}", serialize(doc)));
    }
    Ok(())
}

pub fn run(n_trees: usize) -> Uniqueness {
    let mut runner = TestRunner::deterministic();
    // built in memory, so nesting the parser would never produce is covered too
    let docs = trees::raw_document(4, 60);
    let mut out = Uniqueness::default();
    for _ in 0..n_trees {
        let doc = docs.new_tree(&mut runner).expect("document strategy").current();
        out.trees += 1;
        for node in doc.all_nodes().filter(|&n| n != doc.document_node()) {
            out.nodes += 1;
            let res = generate_xpath(&doc, node).map_err(|e| e.to_string()).and_then(|xp| selects_exactly(&doc, &xp, node));
            if let Err(e) = res {
                out.failures.push(e);
            }
        }
    }
    out
}
