//! Point-based scoring and the accuracy / precision / recall calculator.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::points::Points;
use crate::category::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Correct,
    Partial,
    Hallucinated,
    Missed,
    /// Not on the scraped page, only reachable through interaction.
    AbsentDynamic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub item: String,
    pub category: Category,
    pub verdict: Verdict,
    /// Required for `PARTIAL`: what was misrepresented.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Judgment {
    pub fn new(category: Category, item: impl Into<String>, verdict: Verdict) -> Self {
        Judgment { item: item.into(), category, verdict, note: None }
    }

    pub fn partial(category: Category, item: impl Into<String>, note: impl Into<String>) -> Self {
        Judgment { item: item.into(), category, verdict: Verdict::Partial, note: Some(note.into()) }
    }

    /// A `PARTIAL` verdict must carry a non-empty note.
    pub fn is_well_formed(&self) -> bool {
        self.verdict != Verdict::Partial || self.note.as_deref().is_some_and(|n| !n.trim().is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub tp: Points,
    pub fp: Points,
    #[serde(rename = "fn")]
    pub fn_: Points,
    pub tn: Points,
}

impl CategoryCounts {
    pub fn from_f64(tp: f64, fp: f64, fn_: f64, tn: f64) -> Option<Self> {
        Some(CategoryCounts {
            tp: Points::from_f64(tp)?,
            fp: Points::from_f64(fp)?,
            fn_: Points::from_f64(fn_)?,
            tn: Points::from_f64(tn)?,
        })
    }

    pub fn total(&self) -> Points {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl Add for CategoryCounts {
    type Output = CategoryCounts;

    fn add(self, rhs: Self) -> Self {
        CategoryCounts {
            tp: self.tp + rhs.tp,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
            tn: self.tn + rhs.tn,
        }
    }
}

/// Tallies judgments into half-point counts.
pub fn score<'a>(judgments: impl IntoIterator<Item = &'a Judgment>) -> CategoryCounts {
    let mut c = CategoryCounts::default();
    for j in judgments {
        match j.verdict {
            Verdict::Correct => c.tp += Points::ONE,
            Verdict::Partial => {
                c.tp += Points::HALF;
                c.fp += Points::HALF;
            }
            Verdict::Hallucinated => c.fp += Points::ONE,
            Verdict::Missed => c.fn_ += Points::ONE,
            Verdict::AbsentDynamic => c.tn += Points::ONE,
        }
    }
    c
}

/// A percentage rounded half-up to one decimal, held as tenths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Tenths(u64),
    Undefined,
}

impl Metric {
    /// `100 · num / den`, rounded half-up at one decimal.
    fn ratio(num: u64, den: u64) -> Metric {
        if den == 0 {
            return Metric::Undefined;
        }
        let num = u128::from(num);
        let den = u128::from(den);
        Metric::Tenths(((2000 * num + den) / (2 * den)) as u64)
    }

    pub fn from_percent(value: f64) -> Metric {
        Metric::Tenths((value * 10.0).round() as u64)
    }

    pub fn tenths(self) -> Option<u64> {
        match self {
            Metric::Tenths(t) => Some(t),
            Metric::Undefined => None,
        }
    }

    pub fn as_f64(self) -> Option<f64> {
        self.tenths().map(|t| t as f64 / 10.0)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Undefined => f.write_str("-"),
            Metric::Tenths(t) if t % 10 == 0 => write!(f, "{}", t / 10),
            Metric::Tenths(t) => write!(f, "{}.{}", t / 10, t % 10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricsRow {
    pub accuracy: Metric,
    pub precision: Metric,
    pub recall: Metric,
}

impl MetricsRow {
    pub fn get(&self, which: MetricKind) -> Metric {
        match which {
            MetricKind::Accuracy => self.accuracy,
            MetricKind::Precision => self.precision,
            MetricKind::Recall => self.recall,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Accuracy,
    Precision,
    Recall,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Accuracy, MetricKind::Precision, MetricKind::Recall];
}

/// Accuracy, precision and recall for one category.
///
/// An all-zero row scores 100 on every metric; otherwise a zero denominator
/// gives [`Metric::Undefined`].
pub fn metrics(c: &CategoryCounts) -> MetricsRow {
    let (tp, fp, fn_, tn) = (c.tp.halves(), c.fp.halves(), c.fn_.halves(), c.tn.halves());
    let total = tp + fp + fn_ + tn;
    if total == 0 {
        let full = Metric::Tenths(1000);
        return MetricsRow { accuracy: full, precision: full, recall: full };
    }
    MetricsRow {
        accuracy: Metric::ratio(tp + tn, total),
        precision: Metric::ratio(tp, tp + fp),
        recall: Metric::ratio(tp, tp + fn_),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Aggregate {
    pub mean: MetricsRow,
    pub median: MetricsRow,
}

/// Mean and median of each metric over displayed (rounded) row values.
/// Undefined cells are left out of that metric's statistics.
pub fn aggregate(rows: &[MetricsRow]) -> Aggregate {
    let stat = |which: MetricKind| {
        let mut values: Vec<u64> = rows.iter().filter_map(|r| r.get(which).tenths()).collect();
        values.sort_unstable();
        (mean_tenths(&values), median_tenths(&values))
    };
    let (am, ad) = stat(MetricKind::Accuracy);
    let (pm, pd) = stat(MetricKind::Precision);
    let (rm, rd) = stat(MetricKind::Recall);
    Aggregate {
        mean: MetricsRow { accuracy: am, precision: pm, recall: rm },
        median: MetricsRow { accuracy: ad, precision: pd, recall: rd },
    }
}

fn mean_tenths(values: &[u64]) -> Metric {
    if values.is_empty() {
        return Metric::Undefined;
    }
    let n = values.len() as u64;
    let sum: u64 = values.iter().sum();
    Metric::Tenths((2 * sum + n) / (2 * n))
}

fn median_tenths(sorted: &[u64]) -> Metric {
    let n = sorted.len();
    match n {
        0 => Metric::Undefined,
        _ if n % 2 == 1 => Metric::Tenths(sorted[n / 2]),
        _ => Metric::Tenths((sorted[n / 2 - 1] + sorted[n / 2]).div_ceil(2)),
    }
}
