use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{select, MetricRow, StatsError};
use crate::chat::Level;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnPoint {
    pub turn_index: u32,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    /// 95% Student-t interval; absent when only one chat reached this turn.
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnCurve {
    pub level: Level,
    pub points: Vec<TurnPoint>,
}

impl TurnCurve {
    pub fn mean_at(&self, turn: u32) -> Option<f64> {
        self.points.iter().find(|p| p.turn_index == turn).map(|p| p.mean)
    }
}

fn point(turn_index: u32, values: &[f64]) -> TurnPoint {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return TurnPoint { turn_index, n, mean, sd: None, ci: None };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df >= 1").inverse_cdf(0.975);
    let half = t * sd / (n as f64).sqrt();
    TurnPoint { turn_index, n, mean, sd: Some(sd), ci: Some((mean - half, mean + half)) }
}

/// Per-level mean curve over turns for one metric and model.
pub fn turn_curves(rows: &[MetricRow], metric: &str, model: &str) -> Result<BTreeMap<Level, TurnCurve>, StatsError> {
    let mut buckets: BTreeMap<Level, BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for r in select(rows, metric, model) {
        buckets.entry(r.level).or_default().entry(r.turn_index).or_default().push(r.value);
    }
    if buckets.is_empty() {
        return Err(StatsError::InsufficientData(format!("no rows for {metric} / {model}")));
    }
    Ok(buckets
        .into_iter()
        .map(|(level, turns)| {
            let points = turns.iter().map(|(&t, v)| point(t, v)).collect();
            (level, TurnCurve { level, points })
        })
        .collect())
}

/// Linear-interpolation sample quantile (the common "type 7" definition).
/// `sorted` must be ascending and non-empty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges; a single degenerate bin has two
    /// equal edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Silverman's rule-of-thumb kernel bandwidth.
    pub bandwidth: f64,
}

/// Freedman–Diaconis histogram of `values`. Falls back to Sturges' bin count
/// when the interquartile range is zero but the values are not all equal.
pub fn density_summary(values: &[f64]) -> Result<Histogram, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::InsufficientData(format!("{} values for a density summary", values.len())));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let bandwidth = 0.9 * spread * (n as f64).powf(-0.2);

    if max == min {
        return Ok(Histogram { edges: vec![min, max], counts: vec![n], bandwidth });
    }
    let bins = if iqr > 0.0 {
        let width = 2.0 * iqr * (n as f64).powf(-1.0 / 3.0);
        ((max - min) / width).ceil().max(1.0) as usize
    } else {
        (n as f64).log2().ceil() as usize + 1
    };
    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { max } else { min + width * i as f64 }).collect();
    let mut counts = vec![0usize; bins];
    for &v in &sorted {
        let k = (((v - min) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts, bandwidth })
}
