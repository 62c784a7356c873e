//! Scripted conversations for the programming loop.
//!
//! Five seed pages share one layout; pages 0-2 sit under `div#a`, pages 3-4
//! under `div#b`. Each page holds the target `t` and two distractors, so a
//! script can steer the mean seed F1 to exact values:
//! `//p` scores 0.5, [`SCORE_08`] scores 0.8 and [`SCORE_03`] scores 0.3.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde_json::json;
use xpath_agent::dom::{parse_str, DomDocument};
use xpath_agent::ie_stage::{FieldQuery, MergedTargets};
use xpath_agent::llm::{ChatMessage, FnTransport, Gateway, LlmError, Role};
use xpath_agent::programmer_stage::{program_xpath, ProgramError, ProgramOutcome, Seed};

pub const SCORE_05: &str = "//p";
pub const SCORE_08: &str = "//div[@id='a']/p[1] | //div[@id='b']/p";
pub const SCORE_03: &str = "//div[@id='a']/p";
pub const PERFECT: &str = "//p[@class='v']";

pub fn docs() -> Vec<DomDocument> {
    (0..5)
        .map(|i| {
            let id = if i < 3 { "a" } else { "b" };
            parse_str(&format!(
                r#"<body class="site-loop"><div id="{id}"><p class="v">t</p><p class="x">u{i}</p><p class="y">w{i}</p></div></body>"#
            ))
        })
        .collect()
}

pub fn reply(xpath: &str) -> String {
    format!("```json\n{}\n```", json!({ "thought": "scripted", "xpath": xpath }))
}

pub struct Run {
    pub result: Result<ProgramOutcome, ProgramError>,
    pub calls: usize,
}

/// Runs the loop with replies taken from `script` by round (the last repeats).
pub fn run(script: &[String]) -> Run {
    let docs = docs();
    let ids = ["0", "1", "2", "3", "4"];
    let seeds: Vec<Seed> = docs
        .iter()
        .zip(ids)
        .map(|(doc, page_id)| Seed { page_id, doc, values: vec!["t".into()], anchors: vec!["t".into()] })
        .collect();
    let merged = MergedTargets { all: vec!["t".into()], values: vec!["t".into()], cue: String::new() };
    let field = FieldQuery { name: "thing".into(), question: "What is the thing?".into(), multiplicity: Default::default() };
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&calls);
    let script = script.to_vec();
    let transport = FnTransport::new(move |m: &[ChatMessage]| -> Result<String, LlmError> {
        counter.fetch_add(1, Ordering::SeqCst);
        let round = m.iter().filter(|x| x.role == Role::Assistant).count();
        Ok(script[round.min(script.len() - 1)].clone())
    });
    let gateway = Gateway::new(Arc::new(transport), "scripted");
    let result = program_xpath(&field, &seeds, &merged, &gateway);
    Run { result, calls: calls.load(Ordering::SeqCst) }
}
