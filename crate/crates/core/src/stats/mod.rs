//! Turn curves, density summaries, random-intercept mixed models and drift.

mod curves;
mod drift;
mod lmm;
mod pvalues;

use serde::{Deserialize, Serialize};

use crate::chat::Level;

pub use curves::{density_summary, quantile, turn_curves, Histogram, TurnCurve, TurnPoint};
pub use drift::{drift_from_gaps, drift_report, DriftReport};
pub use lmm::{fit_lmm, fit_lmm_with, GroupedDesign, LmmFit, TermEstimate};
pub use pvalues::{bonferroni, bonferroni_rounded, round_to, significance_stars, PValueMethod};

/// Metric column names, in the order they appear in the metrics table.
pub const METRICS: [&str; 6] = [
    "fernandez_huerta",
    "szigriszt_pazos",
    "gutierrez_de_polini",
    "text_length",
    "mdd",
    "surprisal",
];

/// One observation of one metric for one message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model_id: String,
    pub level: Level,
    pub chat_id: String,
    pub turn_index: u32,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("need at least two groups, got {groups}")]
    TooFewGroups { groups: usize },
    #[error("fixed-effects design is rank deficient")]
    RankDeficient,
    #[error("covariance block is singular at lambda = {lambda}")]
    SingularBlock { lambda: f64 },
    #[error("variance search did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
}

/// Rows of one metric and model.
pub fn select<'a>(rows: &'a [MetricRow], metric: &'a str, model: &'a str) -> impl Iterator<Item = &'a MetricRow> + 'a {
    rows.iter().filter(move |r| r.metric == metric && r.model_id == model)
}
