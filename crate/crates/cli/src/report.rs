//! Markdown summary of an analysis directory.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use driftlab_core::stats::significance_stars;
use driftlab_core::textmetrics::{interpret, ReadabilityMetric};

use crate::analyze::Analysis;
use crate::io::write_text;
use crate::Outcome;

fn readability_metric(name: &str) -> Option<ReadabilityMetric> {
    match name {
        "fernandez_huerta" => Some(ReadabilityMetric::FernandezHuerta),
        "szigriszt_pazos" => Some(ReadabilityMetric::SzigrisztPazos),
        "gutierrez_de_polini" => Some(ReadabilityMetric::GutierrezDePolini),
        _ => None,
    }
}

fn metrics_in(a: &Analysis) -> Vec<&str> {
    let mut seen: Vec<&str> = Vec::new();
    for m in a.fits.iter().map(|f| f.metric.as_str()).chain(a.level_means.iter().map(|m| m.metric.as_str())) {
        if !seen.contains(&m) {
            seen.push(m);
        }
    }
    seen
}

pub fn render(a: &Analysis) -> String {
    let mut s = String::new();
    let method = match a.p_method {
        driftlab_core::stats::PValueMethod::Normal => "normal approximation",
        driftlab_core::stats::PValueMethod::BetweenGroupsT => "Student t on between-chat degrees of freedom",
    };
    let _ = writeln!(s, "# Tutor output analysis\n");
    let _ = writeln!(
        s,
        "Random-intercept models per metric and model, fit by REML. p-values: {method}, Bonferroni-adjusted with m = {}{}.",
        a.bonferroni_m,
        a.round_raw_p.map(|d| format!(" after rounding raw values to {d} decimals")).unwrap_or_default()
    );
    let _ = writeln!(s, "Significance: `***` p < 0.001, `**` p < 0.01, `*` p < 0.05.\n");

    for metric in metrics_in(a) {
        let _ = writeln!(s, "## {metric}\n");
        let fits: Vec<_> = a.fits.iter().filter(|f| f.metric == metric).collect();
        if !fits.is_empty() {
            let _ = writeln!(s, "| model | term | estimate | SE | t | p (adj) | |");
            let _ = writeln!(s, "|---|---|---:|---:|---:|---:|---|");
            for f in &fits {
                for t in &f.fit.terms {
                    let _ = writeln!(
                        s,
                        "| {} | {} | {:.4} | {:.4} | {:.3} | {:.4} | {} |",
                        f.model_id,
                        t.term,
                        t.estimate,
                        t.se,
                        t.t,
                        t.p_adj,
                        significance_stars(t.p_adj)
                    );
                }
            }
            let _ = writeln!(s);
            let _ = writeln!(s, "| model | σu² | σ² | λ | chats | messages |");
            let _ = writeln!(s, "|---|---:|---:|---:|---:|---:|");
            for f in &fits {
                let _ = writeln!(
                    s,
                    "| {} | {:.4} | {:.4} | {:.4} | {} | {} |",
                    f.model_id, f.fit.sigma_u2, f.fit.sigma2, f.fit.lambda, f.fit.n_groups, f.fit.n_obs
                );
            }
            let _ = writeln!(s);
        }
        let means: Vec<_> = a.level_means.iter().filter(|m| m.metric == metric).collect();
        if !means.is_empty() {
            let rm = readability_metric(metric);
            let _ = writeln!(s, "| model | level | n | mean |{}", if rm.is_some() { " reading ease |" } else { "" });
            let _ = writeln!(s, "|---|---|---:|---:|{}", if rm.is_some() { "---|" } else { "" });
            for m in means {
                let band = rm.map(|r| format!(" {} |", interpret(r, m.mean).unwrap_or("")));
                let _ = writeln!(s, "| {} | {} | {} | {:.3} |{}", m.model_id, m.level, m.n, m.mean, band.unwrap_or_default());
            }
            let _ = writeln!(s);
        }
        let drift: Vec<_> = a.drift.iter().filter(|d| d.metric == metric).collect();
        if !drift.is_empty() {
            let _ = writeln!(s, "A1 minus C1 gap over turns:\n");
            let _ = writeln!(s, "| model | first gap | last gap | slope per turn | SE | shrinking |");
            let _ = writeln!(s, "|---|---:|---:|---:|---:|---|");
            for d in drift {
                let _ = writeln!(
                    s,
                    "| {} | {:.3} | {:.3} | {:.4} | {} | {} |",
                    d.model_id,
                    d.gaps[0],
                    d.gaps[d.gaps.len() - 1],
                    d.slope,
                    d.slope_se.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into()),
                    if d.shrinking { "yes" } else { "no" }
                );
            }
            let _ = writeln!(s);
        }
    }
    if !a.failures.is_empty() {
        let _ = writeln!(s, "## Problems\n");
        for f in &a.failures {
            let _ = writeln!(s, "- {} / {} ({}): {}", f.metric, f.model_id, f.stage, f.error);
        }
    }
    s
}

pub fn run(dir: &Path) -> Result<Outcome> {
    let path = dir.join("analysis.json");
    let src = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    let a: Analysis = serde_json::from_str(&src).with_context(|| path.display().to_string())?;
    let out = dir.join("report.md");
    write_text(&out, &render(&a))?;
    println!("report written to {}", out.display());
    Ok(Outcome::Ok)
}
