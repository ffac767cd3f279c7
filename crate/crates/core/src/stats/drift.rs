use serde::{Deserialize, Serialize};

use super::{turn_curves, MetricRow, StatsError};
use crate::chat::Level;

/// How the A1–C1 gap of one metric evolves over the dialogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub metric: String,
    pub model_id: String,
    pub turns: Vec<u32>,
    /// `mean_A1(t) − mean_C1(t)` at each turn in `turns`.
    pub gaps: Vec<f64>,
    /// Least-squares slope of the gap on the turn index.
    pub slope: f64,
    /// Standard error of the slope; absent with fewer than three turns.
    pub slope_se: Option<f64>,
    /// The slope points back towards zero from the first gap.
    pub shrinking: bool,
}

/// Slope and standard error of `gaps` regressed on `turns`.
pub fn drift_from_gaps(turns: &[u32], gaps: &[f64]) -> Result<(f64, Option<f64>, bool), StatsError> {
    let k = gaps.len();
    if k < 2 || turns.len() != k {
        return Err(StatsError::InsufficientData(format!("{k} turns in the gap series")));
    }
    let xs: Vec<f64> = turns.iter().map(|&t| f64::from(t)).collect();
    let xm = xs.iter().sum::<f64>() / k as f64;
    let ym = gaps.iter().sum::<f64>() / k as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(StatsError::InsufficientData("all gaps at one turn".into()));
    }
    let sxy: f64 = xs.iter().zip(gaps).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let slope_se = (k > 2).then(|| {
        let intercept = ym - slope * xm;
        let ssr: f64 = xs.iter().zip(gaps).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (k - 2) as f64 / sxx).sqrt()
    });
    let shrinking = slope * gaps[0] < 0.0;
    Ok((slope, slope_se, shrinking))
}

/// Drift of the A1–C1 gap for one metric and model, over the turns where
/// both levels have data.
pub fn drift_report(rows: &[MetricRow], metric: &str, model: &str) -> Result<DriftReport, StatsError> {
    let curves = turn_curves(rows, metric, model)?;
    let (a1, c1) = match (curves.get(&Level::A1), curves.get(&Level::C1)) {
        (Some(a), Some(c)) => (a, c),
        _ => return Err(StatsError::InsufficientData(format!("{metric} / {model} lacks A1 or C1 rows"))),
    };
    let mut turns = Vec::new();
    let mut gaps = Vec::new();
    for p in &a1.points {
        if let Some(c) = c1.mean_at(p.turn_index) {
            turns.push(p.turn_index);
            gaps.push(p.mean - c);
        }
    }
    let (slope, slope_se, shrinking) = drift_from_gaps(&turns, &gaps)?;
    Ok(DriftReport { metric: metric.to_string(), model_id: model.to_string(), turns, gaps, slope, slope_se, shrinking })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let (slope, se, shrinking) = drift_from_gaps(&[1, 2, 3, 4], &[15.0, 12.0, 9.0, 6.0]).unwrap();
        assert_eq!(slope, -3.0);
        assert_eq!(se, Some(0.0));
        assert!(shrinking);
    }

    #[test]
    fn constant_gap() {
        let (slope, _, shrinking) = drift_from_gaps(&[1, 2, 3], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(slope, 0.0);
        assert!(!shrinking);
    }

    #[test]
    fn widening_negative_gap_is_not_shrinking() {
        let (_, _, shrinking) = drift_from_gaps(&[1, 2, 3], &[-1.0, -2.0, -3.0]).unwrap();
        assert!(!shrinking);
        let (_, _, shrinking) = drift_from_gaps(&[1, 2, 3], &[-3.0, -2.0, -1.0]).unwrap();
        assert!(shrinking);
    }

    #[test]
    fn report_from_rows() {
        let mut rows = Vec::new();
        for t in 1..=9u32 {
            for (level, value) in [(Level::A1, 90.0 - 0.5 * f64::from(t)), (Level::C1, 75.0 + 0.625 * f64::from(t))] {
                rows.push(MetricRow {
                    model_id: "m".into(),
                    level,
                    chat_id: format!("{level}-0"),
                    turn_index: t,
                    metric: "fernandez_huerta".into(),
                    value,
                });
            }
        }
        let r = drift_report(&rows, "fernandez_huerta", "m").unwrap();
        assert_eq!(r.turns.len(), 9);
        assert_eq!(r.slope, -1.125);
        assert!(r.shrinking);
        assert!(drift_report(&rows[..1], "fernandez_huerta", "m").is_err());
    }
}
