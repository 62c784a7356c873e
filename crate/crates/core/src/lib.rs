//! Two-stage XPath synthesis for web extraction.
//!
//! Stage one sanitizes seed pages and asks a model for field values and cue
//! texts. Stage two condenses the original pages around those texts and runs a
//! propose/evaluate/repair loop until an XPath reproduces the values on every
//! seed page. Everything an LLM answer touches is checked deterministically by
//! the bundled HTML tree and XPath engine.

pub mod condenser;
pub mod corpus;
pub mod dom;
pub mod ie_stage;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod programmer_stage;
pub mod sanitizer;
pub mod scalar;
pub mod static_xpath;
pub mod text;
pub mod xpath;

pub use scalar::Scalar;

/// Metrics report in floating point, as written to `metrics.json`.
pub type MetricsReport = metrics::MetricsReportOf<f64>;
/// Metrics report in exact rationals.
pub type ExactMetricsReport = metrics::MetricsReportOf<num_rational::Ratio<u64>>;
