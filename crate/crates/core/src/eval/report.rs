//! Score files and the per-SaaS metrics report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{aggregate, metrics, score, Aggregate, CategoryCounts, Judgment, MetricsRow};
use crate::category::Category;

/// Pre-tallied counts for one SaaS, stored as `<saas>.counts.json`.
/// Categories that were not evaluated are omitted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CountsFile {
    pub saas: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plans: Option<CategoryCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<CategoryCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage_limits: Option<CategoryCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub add_ons: Option<CategoryCounts>,
}

impl CountsFile {
    pub fn into_row(self) -> ScoreRow {
        let mut counts = BTreeMap::new();
        for (cat, c) in [
            (Category::Plans, self.plans),
            (Category::Features, self.features),
            (Category::UsageLimits, self.usage_limits),
            (Category::AddOns, self.add_ons),
        ] {
            if let Some(c) = c {
                counts.insert(cat, c);
            }
        }
        ScoreRow { saas: self.saas, counts }
    }
}

/// Reviewed judgments for one SaaS, stored as `<saas>.judgments.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentsFile {
    pub saas: String,
    pub judgments: Vec<Judgment>,
}

impl JudgmentsFile {
    /// Scores each category that has at least one judgment.
    pub fn into_row(self) -> ScoreRow {
        let mut counts = BTreeMap::new();
        for cat in Category::ALL {
            let js: Vec<&Judgment> = self.judgments.iter().filter(|j| j.category == cat).collect();
            if !js.is_empty() {
                counts.insert(cat, score(js));
            }
        }
        ScoreRow { saas: self.saas, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRow {
    pub saas: String,
    pub counts: BTreeMap<Category, CategoryCounts>,
}

impl ScoreRow {
    /// Scores every category of a judgment list, including empty ones.
    pub fn from_judgments(saas: impl Into<String>, judgments: &[Judgment]) -> Self {
        let counts = Category::ALL
            .into_iter()
            .map(|cat| (cat, score(judgments.iter().filter(|j| j.category == cat))))
            .collect();
        ScoreRow { saas: saas.into(), counts }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub rows: Vec<ScoreRow>,
    pub aggregates: BTreeMap<Category, Aggregate>,
}

impl Report {
    pub fn new(mut rows: Vec<ScoreRow>) -> Self {
        rows.sort_by(|a, b| a.saas.to_lowercase().cmp(&b.saas.to_lowercase()).then(a.saas.cmp(&b.saas)));
        let mut aggregates = BTreeMap::new();
        for cat in Category::ALL {
            let column: Vec<MetricsRow> = rows.iter().filter_map(|r| r.counts.get(&cat)).map(metrics).collect();
            if !column.is_empty() {
                aggregates.insert(cat, aggregate(&column));
            }
        }
        Report { rows, aggregates }
    }

    /// Aligned text table with one column group per category.
    pub fn render_text(&self) -> String {
        let name_width = self.rows.iter().map(|r| r.saas.chars().count()).chain([6]).max().unwrap_or(6);
        let mut out = String::new();
        let _ = write!(out, "{:name_width$}", "");
        for cat in Category::ALL {
            let _ = write!(out, " | {:<49}", cat.title());
        }
        out.push('\n');
        let _ = write!(out, "{:name_width$}", "SaaS");
        for _ in Category::ALL {
            let _ = write!(
                out,
                " | {:>5} {:>5} {:>5} {:>5} {:>5} {:>6} {:>6} {:>6}",
                "TP", "FP", "FN", "TN", "T", "A(%)", "P(%)", "R(%)"
            );
        }
        out.push('\n');
        let _ = write!(out, "{}", "-".repeat(name_width));
        for _ in Category::ALL {
            let _ = write!(out, "-+-{}", "-".repeat(49));
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:name_width$}", row.saas);
            for cat in Category::ALL {
                match row.counts.get(&cat) {
                    Some(c) => {
                        let m = metrics(c);
                        let _ = write!(
                            out,
                            " | {:>5} {:>5} {:>5} {:>5} {:>5} {:>6} {:>6} {:>6}",
                            c.tp.to_string(),
                            c.fp.to_string(),
                            c.fn_.to_string(),
                            c.tn.to_string(),
                            c.total().to_string(),
                            m.accuracy.to_string(),
                            m.precision.to_string(),
                            m.recall.to_string()
                        );
                    }
                    None => {
                        let _ = write!(out, " | {:49}", "");
                    }
                }
            }
            out.push('\n');
        }
        for (label, pick) in [("Mean", 0usize), ("Median", 1usize)] {
            let _ = write!(out, "{:name_width$}", label);
            for cat in Category::ALL {
                match self.aggregates.get(&cat) {
                    Some(agg) => {
                        let m = if pick == 0 { agg.mean } else { agg.median };
                        let _ = write!(
                            out,
                            " | {:29} {:>6} {:>6} {:>6}",
                            "",
                            m.accuracy.to_string(),
                            m.precision.to_string(),
                            m.recall.to_string()
                        );
                    }
                    None => {
                        let _ = write!(out, " | {:49}", "");
                    }
                }
            }
            out.push('\n');
        }
        out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
    }

    /// One CSV line per SaaS and category, then the mean and median lines.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("saas,category,tp,fp,fn,tn,total,accuracy,precision,recall\n");
        for row in &self.rows {
            for (cat, c) in &row.counts {
                let m = metrics(c);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&row.saas),
                    cat.as_str(),
                    c.tp,
                    c.fp,
                    c.fn_,
                    c.tn,
                    c.total(),
                    m.accuracy,
                    m.precision,
                    m.recall
                );
            }
        }
        for (label, pick) in [("Mean", 0usize), ("Median", 1usize)] {
            for (cat, agg) in &self.aggregates {
                let m = if pick == 0 { agg.mean } else { agg.median };
                let _ = writeln!(out, "{label},{},,,,,,{},{},{}", cat.as_str(), m.accuracy, m.precision, m.recall);
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
