use std::io::{self, Write};
use std::sync::Mutex;

use serde::Serialize;

use super::ChatMessage;
use crate::text::ws_token_count;

#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub label: String,
    pub model: String,
    pub prompt_chars: usize,
    pub prompt_tokens: usize,
    pub response_chars: usize,
    pub response_tokens: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LedgerTotals {
    pub calls: usize,
    pub prompt_chars: usize,
    pub prompt_tokens: usize,
    pub response_chars: usize,
    pub response_tokens: usize,
}

/// Per-call character and whitespace-token counts for one run.
#[derive(Default)]
pub struct RunLedger {
    entries: Mutex<Vec<LedgerEntry>>,
    notes: Mutex<Vec<(String, serde_json::Value)>>,
}

impl RunLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, label: &str, model: &str, messages: &[ChatMessage], reply: &str) {
        let prompt_chars = messages.iter().map(|m| m.content.chars().count()).sum();
        let prompt_tokens = messages.iter().map(|m| ws_token_count(&m.content)).sum();
        self.entries.lock().unwrap().push(LedgerEntry {
            label: label.to_string(),
            model: model.to_string(),
            prompt_chars,
            prompt_tokens,
            response_chars: reply.chars().count(),
            response_tokens: ws_token_count(reply),
        });
    }

    /// Attaches a run-level fact (such as the rng seed) written before the calls.
    pub fn note(&self, key: &str, value: serde_json::Value) {
        self.notes.lock().unwrap().push((key.to_string(), value));
    }

    /// Entries sorted by label, so concurrent runs produce a stable order.
    /// No wall-clock data is kept, which keeps run directories byte-stable.
    pub fn entries(&self) -> Vec<LedgerEntry> {
        let mut e = self.entries.lock().unwrap().clone();
        e.sort_by(|a, b| a.label.cmp(&b.label));
        e
    }

    pub fn totals(&self) -> LedgerTotals {
        self.entries
            .lock()
            .unwrap()
            .iter()
            .fold(LedgerTotals::default(), |mut t, e| {
                t.calls += 1;
                t.prompt_chars += e.prompt_chars;
                t.prompt_tokens += e.prompt_tokens;
                t.response_chars += e.response_chars;
                t.response_tokens += e.response_tokens;
                t
            })
    }

    /// Notes, then one line per call, then a `{"total": ...}` line.
    pub fn write_jsonl(&self, mut w: impl Write) -> io::Result<()> {
        let mut notes = self.notes.lock().unwrap().clone();
        notes.sort_by(|a, b| a.0.cmp(&b.0));
        for (k, v) in notes {
            serde_json::to_writer(&mut w, &serde_json::json!({ "note": k, "value": v }))?;
            w.write_all(b"\n")?;
        }
        for e in self.entries() {
            serde_json::to_writer(&mut w, &e)?;
            w.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut w, &serde_json::json!({ "total": self.totals() }))?;
        w.write_all(b"\n")
    }
}
