use rayon::prelude::*;
use serde::Serialize;

use super::{sanitize_and_minify, SanitizationReport};
use crate::dom::parse_html;

#[derive(thiserror::Error, Debug)]
pub enum StatsError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("page {page_id}: {source}")]
    Page {
        page_id: String,
        #[source]
        source: crate::dom::DomError,
    },
}

pub struct PageInput {
    pub category: String,
    pub page_id: String,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PageStats {
    pub category: String,
    pub page_id: String,
    #[serde(flatten)]
    pub report: SanitizationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct CategorySummary {
    pub category: String,
    pub pages: usize,
    pub mean_ratio: f64,
    pub median_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TokenStats {
    pub pages: Vec<PageStats>,
    pub categories: Vec<CategorySummary>,
}

/// One report per page plus per-category mean and median ratios.
///
/// Pages are processed in parallel; output order follows the input order.
pub fn token_stats(corpus: &[PageInput]) -> Result<TokenStats, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let pages = corpus
        .par_iter()
        .map(|p| {
            let doc = parse_html(&p.bytes).map_err(|source| StatsError::Page {
                page_id: p.page_id.clone(),
                source,
            })?;
            let (_, report) = sanitize_and_minify(&doc);
            Ok(PageStats {
                category: p.category.clone(),
                page_id: p.page_id.clone(),
                report,
            })
        })
        .collect::<Result<Vec<_>, StatsError>>()?;

    let mut names: Vec<&str> = pages.iter().map(|p| p.category.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    let categories = names
        .into_iter()
        .map(|name| {
            let mut ratios: Vec<f64> = pages
                .iter()
                .filter(|p| p.category == name)
                .map(|p| p.report.ratio)
                .collect();
            ratios.sort_by(f64::total_cmp);
            let n = ratios.len();
            let median = if n % 2 == 1 {
                ratios[n / 2]
            } else {
                (ratios[n / 2 - 1] + ratios[n / 2]) / 2.0
            };
            CategorySummary {
                category: name.to_string(),
                pages: n,
                mean_ratio: ratios.iter().sum::<f64>() / n as f64,
                median_ratio: median,
            }
        })
        .collect();
    Ok(TokenStats { pages, categories })
}

impl TokenStats {
    pub fn mean_ratio(&self) -> f64 {
        self.pages.iter().map(|p| p.report.ratio).sum::<f64>() / self.pages.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "category,page_id,original_bytes,sanitized_bytes,minified_bytes,ratio,removed_nodes,original_tokens,minified_tokens\n",
        );
        for p in &self.pages {
            let r = &p.report;
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{},{},{}\n",
                csv_field(&p.category),
                csv_field(&p.page_id),
                r.original_bytes,
                r.sanitized_bytes,
                r.minified_bytes,
                r.ratio,
                r.removed_nodes,
                r.original_tokens,
                r.minified_tokens
            ));
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("category,pages,mean_ratio,median_ratio\n");
        for c in &self.categories {
            out.push_str(&format!(
                "{},{},{:.6},{:.6}\n",
                csv_field(&c.category),
                c.pages,
                c.mean_ratio,
                c.median_ratio
            ));
        }
        out
    }

    /// Scatter data (original vs. minified size) grouped by category.
    pub fn plot_json(&self) -> serde_json::Value {
        let mut groups = serde_json::Map::new();
        for c in &self.categories {
            let points: Vec<[usize; 2]> = self
                .pages
                .iter()
                .filter(|p| p.category == c.category)
                .map(|p| [p.report.original_bytes, p.report.minified_bytes])
                .collect();
            groups.insert(c.category.clone(), serde_json::json!(points));
        }
        serde_json::Value::Object(groups)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
