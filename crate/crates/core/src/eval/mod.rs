//! Point-based evaluation of extraction quality.

mod judge;
mod metrics;
mod points;
mod report;

pub use judge::{judge, GoldAddOn, GoldAnnotation, GoldFeature, GoldPlan, GoldUsageLimit};
pub use metrics::{aggregate, metrics, score, Aggregate, CategoryCounts, Judgment, Metric, MetricKind, MetricsRow, Verdict};
pub use points::Points;
pub use report::{CountsFile, JudgmentsFile, Report, ScoreRow};
