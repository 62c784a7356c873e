//! Set-matching evaluation of final XPaths on held-out pages.
//!
//! Predictions and ground truth are compared as unordered sets of
//! whitespace-normalized strings. Counts are micro-averaged (summed over pages
//! and labels) before precision, recall, F1 and accuracy are derived.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dom::DomDocument;
use crate::scalar::{count_ratio, Scalar};
use crate::text::normalize_ws;
use crate::xpath::select_strings;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no page counts to aggregate")]
    EmptyInput,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PageCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub exact_match: bool,
}

fn normalized_set(items: &[String]) -> BTreeSet<String> {
    items
        .iter()
        .map(|s| normalize_ws(s))
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn page_counts(predicted: &[String], truth: &[String]) -> PageCounts {
    let p = normalized_set(predicted);
    let t = normalized_set(truth);
    let tp = p.intersection(&t).count() as u64;
    let fp = p.len() as u64 - tp;
    let fn_ = t.len() as u64 - tp;
    PageCounts {
        tp,
        fp,
        fn_,
        exact_match: fp == 0 && fn_ == 0,
    }
}

/// Aggregate scores over a set of pages.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics<S> {
    pub precision: S,
    pub recall: S,
    pub f1: S,
    /// `tp / (tp + fp + fn)`.
    pub accuracy: S,
    /// Share of pages whose predicted set equals the truth set.
    pub exact_match_rate: S,
    pub exact_matches: u64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub page_count: usize,
    /// Metrics whose denominator was zero and were reported as 0.
    pub zero_denominator: Vec<&'static str>,
}

pub fn aggregate<S: Scalar>(counts: &[PageCounts]) -> Result<Metrics<S>, MetricsError> {
    if counts.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let tp: u64 = counts.iter().map(|c| c.tp).sum();
    let fp: u64 = counts.iter().map(|c| c.fp).sum();
    let fn_: u64 = counts.iter().map(|c| c.fn_).sum();
    let exact = counts.iter().filter(|c| c.exact_match).count() as u64;
    Ok(from_totals(tp, fp, fn_, exact, counts.len()))
}

/// Micro-average of several reports, as if their pages had been aggregated together.
pub fn combine<S: Scalar>(parts: &[&Metrics<S>]) -> Metrics<S> {
    let sum = |f: fn(&Metrics<S>) -> u64| parts.iter().map(|m| f(m)).sum::<u64>();
    let pages: usize = parts.iter().map(|m| m.page_count).sum();
    if pages == 0 {
        return Metrics::empty();
    }
    from_totals(
        sum(|m| m.tp),
        sum(|m| m.fp),
        sum(|m| m.fn_),
        sum(|m| m.exact_matches),
        pages,
    )
}

fn from_totals<S: Scalar>(tp: u64, fp: u64, fn_: u64, exact: u64, pages: usize) -> Metrics<S> {
    let mut zero = Vec::new();
    let mut or_zero = |name: &'static str, v: Option<S>| {
        v.unwrap_or_else(|| {
            zero.push(name);
            S::zero()
        })
    };
    let precision = or_zero("precision", count_ratio(tp, tp + fp));
    let recall = or_zero("recall", count_ratio(tp, tp + fn_));
    let sum = precision + recall;
    let f1 = or_zero(
        "f1",
        (sum != S::zero()).then(|| (S::one() + S::one()) * precision * recall / sum),
    );
    let accuracy = or_zero("accuracy", count_ratio(tp, tp + fp + fn_));
    let exact_match_rate = count_ratio(exact, pages as u64).unwrap_or_else(S::zero);
    Metrics {
        precision,
        recall,
        f1,
        accuracy,
        exact_match_rate,
        exact_matches: exact,
        tp,
        fp,
        fn_,
        page_count: pages,
        zero_denominator: zero,
    }
}

impl<S: Scalar> Metrics<S> {
    /// Scores for an empty evaluation: all zero, every ratio flagged.
    pub fn empty() -> Self {
        Metrics {
            precision: S::zero(),
            recall: S::zero(),
            f1: S::zero(),
            accuracy: S::zero(),
            exact_match_rate: S::zero(),
            exact_matches: 0,
            tp: 0,
            fp: 0,
            fn_: 0,
            page_count: 0,
            zero_denominator: vec!["precision", "recall", "f1", "accuracy"],
        }
    }
}

/// Per-field and overall scores for one task.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReportOf<S> {
    pub overall: Metrics<S>,
    pub per_field: BTreeMap<String, Metrics<S>>,
    /// Field/page pairs skipped because their ground truth was blank.
    pub skipped_blank: usize,
}

/// One evaluation page: the parsed document and its truth per field.
pub struct EvalPage<'a> {
    pub page_id: &'a str,
    pub doc: &'a DomDocument,
    pub truth: &'a BTreeMap<String, Vec<String>>,
}

/// Applies every field's XPath to every page and scores the extracted sets.
///
/// An XPath that fails to parse or evaluate predicts nothing on that page.
pub fn evaluate_task<S: Scalar>(
    xpaths: &BTreeMap<String, String>,
    pages: &[EvalPage<'_>],
) -> MetricsReportOf<S> {
    let mut per_field_counts: BTreeMap<String, Vec<PageCounts>> = BTreeMap::new();
    let mut skipped = 0;
    for (field, xpath) in xpaths {
        let counts = per_field_counts.entry(field.clone()).or_default();
        for page in pages {
            let truth = page.truth.get(field).map(Vec::as_slice).unwrap_or(&[]);
            if normalized_set(truth).is_empty() {
                skipped += 1;
                continue;
            }
            let predicted = select_strings(page.doc, xpath).unwrap_or_else(|e| {
                log::debug!("{field} on {}: {e}", page.page_id);
                Vec::new()
            });
            counts.push(page_counts(&predicted, truth));
        }
    }
    if skipped > 0 {
        log::info!("skipped {skipped} field/page pairs with blank ground truth");
    }
    let all: Vec<PageCounts> = per_field_counts.values().flatten().copied().collect();
    let per_field = per_field_counts
        .iter()
        .map(|(f, c)| (f.clone(), aggregate(c).unwrap_or_else(|_| Metrics::empty())))
        .collect();
    MetricsReportOf {
        overall: aggregate(&all).unwrap_or_else(|_| Metrics::empty()),
        per_field,
        skipped_blank: skipped,
    }
}

/// Renders rows as an aligned Model/Accuracy/Precision/Recall/F1 table.
pub fn render_table<S: Scalar>(rows: &[(String, Metrics<S>)]) -> String {
    let header = ["Model", "Accuracy", "Precision", "Recall", "F1"];
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|(name, m)| {
            [
                name.clone(),
                format!("{:.4}", m.accuracy.to_f64()),
                format!("{:.4}", m.precision.to_f64()),
                format!("{:.4}", m.recall.to_f64()),
                format!("{:.4}", m.f1.to_f64()),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for r in &body {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        format!("| {} |\n", parts.join(" | "))
    };
    let rule: String = format!("|{}|\n", widths.map(|w| "-".repeat(w + 2)).join("|"));
    let mut out = line(&header.map(String::from));
    out.push_str(&rule);
    for r in &body {
        out.push_str(&line(r));
    }
    out
}
