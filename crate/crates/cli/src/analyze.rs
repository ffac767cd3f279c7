//! Model fits, turn curves, densities and drift over a metrics table.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{bail, Result};
use driftlab_core::stats::{
    density_summary, drift_report, fit_lmm_with, select, significance_stars, turn_curves, DriftReport, Histogram,
    LmmFit, MetricRow, PValueMethod, TurnCurve, METRICS,
};
use driftlab_core::Level;
use serde::{Deserialize, Serialize};

use crate::io::{read_csv, write_csv, write_text};
use crate::score::MetricsRecord;
use crate::Outcome;

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyzeOptions {
    /// Bonferroni family size; defaults to two contrasts per fit.
    pub bonferroni_m: Option<usize>,
    pub p_method: PValueMethod,
    /// Round raw p-values to this many decimals before adjusting.
    pub round_raw_p: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub metric: String,
    pub model_id: String,
    pub fit: LmmFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub metric: String,
    pub model_id: String,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEntry {
    pub metric: String,
    pub model_id: String,
    pub curves: Vec<TurnCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub metric: String,
    pub model_id: String,
    pub level: Level,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMean {
    pub metric: String,
    pub model_id: String,
    pub level: Level,
    pub n: usize,
    pub mean: f64,
}

/// Everything `report` renders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub p_method: PValueMethod,
    pub bonferroni_m: usize,
    pub round_raw_p: Option<u32>,
    pub fits: Vec<FitEntry>,
    pub curves: Vec<CurveEntry>,
    pub histograms: Vec<HistogramEntry>,
    pub level_means: Vec<LevelMean>,
    pub drift: Vec<DriftReport>,
    pub failures: Vec<Failure>,
}

/// Long format: one row per non-empty metric cell.
pub fn long_rows(records: &[MetricsRecord]) -> Vec<MetricRow> {
    let mut out = Vec::new();
    for r in records {
        for (metric, value) in r.values() {
            if let Some(value) = value.filter(|v| v.is_finite()) {
                out.push(MetricRow {
                    model_id: r.model_id.clone(),
                    level: r.level,
                    chat_id: r.chat_id.clone(),
                    turn_index: r.turn_index,
                    metric: metric.to_string(),
                    value,
                });
            }
        }
    }
    out
}

pub fn analyze(rows: &[MetricRow], opts: AnalyzeOptions) -> Analysis {
    let models: BTreeSet<&str> = rows.iter().map(|r| r.model_id.as_str()).collect();
    let mut a = Analysis {
        p_method: opts.p_method,
        bonferroni_m: 0,
        round_raw_p: opts.round_raw_p,
        fits: Vec::new(),
        curves: Vec::new(),
        histograms: Vec::new(),
        level_means: Vec::new(),
        drift: Vec::new(),
        failures: Vec::new(),
    };
    for metric in METRICS {
        for &model in &models {
            let selected: Vec<&MetricRow> = select(rows, metric, model).collect();
            if selected.is_empty() {
                continue;
            }
            let fail = |stage: &str, e: &dyn std::fmt::Display| Failure {
                metric: metric.into(),
                model_id: model.into(),
                stage: stage.into(),
                error: e.to_string(),
            };
            match fit_lmm_with(selected.iter().copied(), opts.p_method) {
                Ok(fit) => a.fits.push(FitEntry { metric: metric.into(), model_id: model.into(), fit }),
                Err(e) => a.failures.push(fail("fit", &e)),
            }
            match turn_curves(rows, metric, model) {
                Ok(c) => a.curves.push(CurveEntry { metric: metric.into(), model_id: model.into(), curves: c.into_values().collect() }),
                Err(e) => a.failures.push(fail("curves", &e)),
            }
            let mut by_level: BTreeMap<Level, Vec<f64>> = BTreeMap::new();
            for r in &selected {
                by_level.entry(r.level).or_default().push(r.value);
            }
            for (level, values) in by_level {
                a.level_means.push(LevelMean {
                    metric: metric.into(),
                    model_id: model.into(),
                    level,
                    n: values.len(),
                    mean: values.iter().sum::<f64>() / values.len() as f64,
                });
                match density_summary(&values) {
                    Ok(h) => a.histograms.push(HistogramEntry { metric: metric.into(), model_id: model.into(), level, histogram: h }),
                    Err(e) => a.failures.push(fail(&format!("density {level}"), &e)),
                }
            }
            match drift_report(rows, metric, model) {
                Ok(d) => a.drift.push(d),
                Err(e) => a.failures.push(fail("drift", &e)),
            }
        }
    }
    let contrasts: usize = a.fits.iter().map(|f| f.fit.terms.len().saturating_sub(1)).sum();
    a.bonferroni_m = opts.bonferroni_m.unwrap_or(contrasts).max(1);
    for f in &mut a.fits {
        f.fit.adjust(a.bonferroni_m, opts.round_raw_p);
    }
    a
}

#[derive(Serialize)]
struct FitRow<'a> {
    metric: &'a str,
    model_id: &'a str,
    term: &'a str,
    estimate: f64,
    se: f64,
    t: f64,
    df: usize,
    p_raw: f64,
    p_adj: f64,
    stars: &'static str,
}

#[derive(Serialize)]
struct VarianceRow<'a> {
    metric: &'a str,
    model_id: &'a str,
    sigma_u2: f64,
    sigma2: f64,
    lambda: f64,
    reml: f64,
    n_obs: usize,
    n_groups: usize,
    converged: bool,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    metric: &'a str,
    model_id: &'a str,
    level: Level,
    turn_index: u32,
    n: usize,
    mean: f64,
    sd: Option<f64>,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
}

#[derive(Serialize)]
struct BinRow<'a> {
    metric: &'a str,
    model_id: &'a str,
    level: Level,
    bin_lo: f64,
    bin_hi: f64,
    count: usize,
    bandwidth: f64,
}

#[derive(Serialize)]
struct GapRow<'a> {
    metric: &'a str,
    model_id: &'a str,
    turn_index: u32,
    gap: f64,
}

#[derive(Serialize)]
struct DriftRow<'a> {
    metric: &'a str,
    model_id: &'a str,
    turns: usize,
    first_gap: f64,
    last_gap: f64,
    slope: f64,
    slope_se: Option<f64>,
    shrinking: bool,
}

pub fn write_outputs(dir: &Path, a: &Analysis) -> Result<()> {
    let mut fits = Vec::new();
    let mut vars = Vec::new();
    for f in &a.fits {
        for t in &f.fit.terms {
            fits.push(FitRow {
                metric: &f.metric,
                model_id: &f.model_id,
                term: &t.term,
                estimate: t.estimate,
                se: t.se,
                t: t.t,
                df: f.fit.df_between,
                p_raw: t.p_raw,
                p_adj: t.p_adj,
                stars: significance_stars(t.p_adj),
            });
        }
        vars.push(VarianceRow {
            metric: &f.metric,
            model_id: &f.model_id,
            sigma_u2: f.fit.sigma_u2,
            sigma2: f.fit.sigma2,
            lambda: f.fit.lambda,
            reml: f.fit.reml,
            n_obs: f.fit.n_obs,
            n_groups: f.fit.n_groups,
            converged: f.fit.converged,
        });
    }
    write_csv(&dir.join("fits.csv"), &fits)?;
    write_csv(&dir.join("variance_components.csv"), &vars)?;

    let mut curves = Vec::new();
    for c in &a.curves {
        for tc in &c.curves {
            for p in &tc.points {
                curves.push(CurveRow {
                    metric: &c.metric,
                    model_id: &c.model_id,
                    level: tc.level,
                    turn_index: p.turn_index,
                    n: p.n,
                    mean: p.mean,
                    sd: p.sd,
                    ci_lo: p.ci.map(|c| c.0),
                    ci_hi: p.ci.map(|c| c.1),
                });
            }
        }
    }
    write_csv(&dir.join("curves.csv"), &curves)?;

    let mut bins = Vec::new();
    for h in &a.histograms {
        for (i, &count) in h.histogram.counts.iter().enumerate() {
            bins.push(BinRow {
                metric: &h.metric,
                model_id: &h.model_id,
                level: h.level,
                bin_lo: h.histogram.edges[i],
                bin_hi: h.histogram.edges[i + 1],
                count,
                bandwidth: h.histogram.bandwidth,
            });
        }
    }
    write_csv(&dir.join("histograms.csv"), &bins)?;

    let mut gaps = Vec::new();
    let mut summary = Vec::new();
    for d in &a.drift {
        for (&turn_index, &gap) in d.turns.iter().zip(&d.gaps) {
            gaps.push(GapRow { metric: &d.metric, model_id: &d.model_id, turn_index, gap });
        }
        summary.push(DriftRow {
            metric: &d.metric,
            model_id: &d.model_id,
            turns: d.turns.len(),
            first_gap: d.gaps[0],
            last_gap: *d.gaps.last().expect("at least two gaps"),
            slope: d.slope,
            slope_se: d.slope_se,
            shrinking: d.shrinking,
        });
    }
    write_csv(&dir.join("drift.csv"), &gaps)?;
    write_csv(&dir.join("drift_summary.csv"), &summary)?;
    write_text(&dir.join("analysis.json"), &serde_json::to_string_pretty(a)?)
}

pub fn run(metrics: &Path, out: &Path, opts: AnalyzeOptions) -> Result<Outcome> {
    let records: Vec<MetricsRecord> = read_csv(metrics)?;
    let rows = long_rows(&records);
    if rows.is_empty() {
        bail!("{} has no metric values", metrics.display());
    }
    let a = analyze(&rows, opts);
    write_outputs(out, &a)?;
    for f in &a.failures {
        tracing::warn!(metric = f.metric.as_str(), model = f.model_id.as_str(), stage = f.stage.as_str(), "{}", f.error);
    }
    println!(
        "{} fits (Bonferroni m = {}), {} drift series written to {}",
        a.fits.len(),
        a.bonferroni_m,
        a.drift.len(),
        out.display()
    );
    if a.fits.is_empty() {
        bail!("no model could be fitted");
    }
    Ok(if a.failures.is_empty() { Outcome::Ok } else { Outcome::Partial })
}
