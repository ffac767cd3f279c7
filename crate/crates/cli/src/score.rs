//! Per-message metrics for tutor messages.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use driftlab_core::depmetrics::{group_by_message, message_mdd, parse_conllu, ConlluSentence, MddOptions};
use driftlab_core::surprisal::{message_surprisal, Scorer, SurprisalError};
use driftlab_core::textmetrics::{strip_emoji, CountingProfile};
use driftlab_core::{Level, Transcript};
use driftlab_llm::scorer::ScorerConfig;
use driftlab_llm::simulator::load_transcripts;
use serde::{Deserialize, Serialize};

use crate::io::write_csv;
use crate::Outcome;

/// One row of the wide metrics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub chat_id: String,
    pub model_id: String,
    pub level: Level,
    pub turn_index: u32,
    pub fernandez_huerta: Option<f64>,
    pub szigriszt_pazos: Option<f64>,
    pub gutierrez_de_polini: Option<f64>,
    pub text_length: Option<f64>,
    pub mdd: Option<f64>,
    pub surprisal: Option<f64>,
}

impl MetricsRecord {
    /// `(metric name, value)` pairs in table order.
    pub fn values(&self) -> [(&'static str, Option<f64>); 6] {
        [
            ("fernandez_huerta", self.fernandez_huerta),
            ("szigriszt_pazos", self.szigriszt_pazos),
            ("gutierrez_de_polini", self.gutierrez_de_polini),
            ("text_length", self.text_length),
            ("mdd", self.mdd),
            ("surprisal", self.surprisal),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub chat_id: String,
    pub turn_index: u32,
    pub metric: String,
    pub error: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScoreOptions {
    pub profile: CountingProfile,
    pub mdd: MddOptions,
}

/// Scores every tutor message. MDD needs parses and surprisal needs a
/// scorer; without them those columns stay empty and no error is recorded.
pub fn score_transcripts(
    transcripts: &[Transcript],
    parses: Option<&[ConlluSentence]>,
    scorer: Option<&dyn Scorer>,
    opts: ScoreOptions,
) -> (Vec<MetricsRecord>, Vec<ErrorRecord>) {
    let grouped = parses.map(|p| {
        let (groups, orphans) = group_by_message(p);
        if !orphans.is_empty() {
            tracing::warn!(count = orphans.len(), "parsed sentences without a usable sent_id were ignored");
        }
        groups
    });
    let mut scorer_down: Option<String> = None;
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for t in transcripts {
        for e in t.tutor_messages() {
            let mut err = |metric: &str, error: String| {
                errors.push(ErrorRecord {
                    chat_id: t.chat_id.clone(),
                    turn_index: e.turn_index,
                    metric: metric.to_string(),
                    error,
                });
            };
            let text = strip_emoji(&e.message.content);
            let mut row = MetricsRecord {
                chat_id: t.chat_id.clone(),
                model_id: t.model_id.clone(),
                level: t.level,
                turn_index: e.turn_index,
                fernandez_huerta: None,
                szigriszt_pazos: None,
                gutierrez_de_polini: None,
                text_length: None,
                mdd: None,
                surprisal: None,
            };
            let stats = opts.profile.stats(&text);
            row.text_length = Some(stats.n_tokens as f64);
            match driftlab_core::textmetrics::readability(&stats, opts.profile.szigriszt_base()) {
                Ok(r) => {
                    row.fernandez_huerta = Some(r.fernandez_huerta);
                    row.szigriszt_pazos = Some(r.szigriszt_pazos);
                    row.gutierrez_de_polini = Some(r.gutierrez_de_polini);
                }
                Err(d) => err("readability", d.to_string()),
            }
            if let Some(groups) = &grouped {
                match groups.get(&(t.chat_id.clone(), e.turn_index)) {
                    Some(sents) => match message_mdd(sents.iter().copied(), opts.mdd) {
                        Ok(m) => row.mdd = Some(m.message_mdd),
                        Err(x) => err("mdd", x.to_string()),
                    },
                    None => err("mdd", "no parsed sentences for this message".into()),
                }
            }
            if let Some(scorer) = scorer {
                if let Some(why) = &scorer_down {
                    err("surprisal", why.clone());
                } else {
                    match message_surprisal(&text, scorer) {
                        Ok(s) => row.surprisal = Some(s.value),
                        Err(SurprisalError::ScorerUnavailable(m)) => {
                            tracing::error!(error = m.as_str(), "scorer unavailable; surprisal left empty");
                            let why = format!("scorer unavailable: {m}");
                            err("surprisal", why.clone());
                            scorer_down = Some(why);
                        }
                        Err(x) => err("surprisal", x.to_string()),
                    }
                }
            }
            rows.push(row);
        }
    }
    (rows, errors)
}

/// Reads one `.conllu` file, or every `.conllu` file in a directory.
pub fn load_conllu(path: &Path) -> Result<Vec<ConlluSentence>> {
    let mut files: Vec<PathBuf> = if path.is_dir() {
        std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "conllu"))
            .collect()
    } else {
        vec![path.to_path_buf()]
    };
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let src = std::fs::read_to_string(&f).with_context(|| format!("cannot read {}", f.display()))?;
        out.extend(parse_conllu(&src).with_context(|| f.display().to_string())?);
    }
    Ok(out)
}

pub struct ScoreArgs<'a> {
    pub transcripts: &'a Path,
    pub conllu: Option<&'a Path>,
    pub scorer: Option<&'a Path>,
    pub out: &'a Path,
    pub opts: ScoreOptions,
}

pub fn run(args: ScoreArgs) -> Result<Outcome> {
    let transcripts = load_transcripts(args.transcripts)?;
    if transcripts.is_empty() {
        anyhow::bail!("no transcripts in {}", args.transcripts.display());
    }
    let parses = args.conllu.map(load_conllu).transpose()?;
    let scorer = match args.scorer {
        Some(p) => {
            let src = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            let cfg: ScorerConfig = toml::from_str(&src).with_context(|| p.display().to_string())?;
            Some(cfg.build()?)
        }
        None => None,
    };
    let scorer_ref = scorer.as_deref().map(|s| s as &dyn Scorer);
    let (rows, errors) = score_transcripts(&transcripts, parses.as_deref(), scorer_ref, args.opts);
    write_csv(args.out, &rows)?;
    let errors_path = args.out.with_extension("errors.csv");
    write_csv(&errors_path, &errors)?;
    let mut by_metric: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &errors {
        *by_metric.entry(e.metric.as_str()).or_default() += 1;
    }
    println!("{} tutor messages scored into {}", rows.len(), args.out.display());
    for (m, n) in &by_metric {
        println!("  {n} {m} errors, see {}", errors_path.display());
    }
    Ok(if errors.is_empty() { Outcome::Ok } else { Outcome::Partial })
}
