//! CoNLL-U parsing and mean dependency distance.
//!
//! Sentences are tied back to chat messages through `# sent_id =
//! chat_id:turn_index:sent_n` comments written by the annotator.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConlluError {
    #[error("line {0}: malformed CoNLL-U line")]
    MalformedLine(usize),
    #[error("sentence {sentence}: token {index} has a head outside the sentence")]
    DanglingHead { sentence: usize, index: usize },
    #[error("sentence {sentence}: expected exactly one root, found {count}")]
    RootCount { sentence: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MddError {
    #[error("sentence has fewer than two scoreable tokens")]
    TooShort,
    #[error("no sentence in the message has two or more tokens")]
    NoScoreableSentence,
}

/// `chat_id:turn_index:sent_n`. The chat id may itself contain colons; the
/// last two fields are always numeric.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SentId {
    pub chat_id: String,
    pub turn_index: u32,
    pub sent_n: u32,
}

impl fmt::Display for SentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.chat_id, self.turn_index, self.sent_n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("sent_id {0:?} is not of the form chat_id:turn_index:sent_n")]
pub struct ParseSentIdError(pub String);

impl FromStr for SentId {
    type Err = ParseSentIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseSentIdError(s.to_string());
        let mut parts = s.rsplitn(3, ':');
        let sent_n = parts.next().and_then(|p| p.parse().ok()).ok_or_else(err)?;
        let turn_index = parts.next().and_then(|p| p.parse().ok()).ok_or_else(err)?;
        let chat_id = parts.next().filter(|c| !c.is_empty()).ok_or_else(err)?;
        Ok(SentId { chat_id: chat_id.to_string(), turn_index, sent_n })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConlluToken {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub upos: String,
    /// 0 marks the root.
    pub head: usize,
    pub deprel: String,
}

impl ConlluToken {
    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConlluSentence {
    pub sent_id: Option<SentId>,
    pub text: Option<String>,
    pub comments: Vec<String>,
    pub tokens: Vec<ConlluToken>,
}

impl ConlluSentence {
    /// `(chat_id, turn_index)` of the message this sentence came from.
    pub fn source_message(&self) -> Option<(&str, u32)> {
        self.sent_id.as_ref().map(|id| (id.chat_id.as_str(), id.turn_index))
    }
}

fn finish(sent: ConlluSentence, ordinal: usize, out: &mut Vec<ConlluSentence>) -> Result<(), ConlluError> {
    if sent.tokens.is_empty() {
        return Ok(());
    }
    let n = sent.tokens.len();
    for t in &sent.tokens {
        if t.head > n || t.head == t.index {
            return Err(ConlluError::DanglingHead { sentence: ordinal, index: t.index });
        }
    }
    let roots = sent.tokens.iter().filter(|t| t.head == 0).count();
    if roots != 1 {
        return Err(ConlluError::RootCount { sentence: ordinal, count: roots });
    }
    out.push(sent);
    Ok(())
}

/// Parses a CoNLL-U document. Multiword-token ranges (`1-2`) and empty nodes
/// (`1.1`) are skipped; a malformed `sent_id` is kept as a plain comment.
pub fn parse_conllu(src: &str) -> Result<Vec<ConlluSentence>, ConlluError> {
    let mut out = Vec::new();
    let mut cur = ConlluSentence::default();
    for (i, raw) in src.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            let ordinal = out.len() + 1;
            finish(std::mem::take(&mut cur), ordinal, &mut out)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => cur.sent_id = value.trim().parse().ok(),
                    "text" => cur.text = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            cur.comments.push(comment.to_string());
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ConlluError::MalformedLine(lineno));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index: usize = cols[0].parse().map_err(|_| ConlluError::MalformedLine(lineno))?;
        let head: usize = cols[6].parse().map_err(|_| ConlluError::MalformedLine(lineno))?;
        if index != cur.tokens.len() + 1 {
            return Err(ConlluError::MalformedLine(lineno));
        }
        cur.tokens.push(ConlluToken {
            index,
            form: cols[1].to_string(),
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    let ordinal = out.len() + 1;
    finish(cur, ordinal, &mut out)?;
    Ok(out)
}

/// Writes sentences back as CoNLL-U with only the columns this crate keeps.
pub fn write_conllu(sentences: &[ConlluSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        if let Some(id) = &s.sent_id {
            out.push_str(&format!("# sent_id = {id}\n"));
        }
        if let Some(text) = &s.text {
            out.push_str(&format!("# text = {text}\n"));
        }
        for t in &s.tokens {
            out.push_str(&format!("{}\t{}\t_\t{}\t_\t_\t{}\t{}\t_\t_\n", t.index, t.form, t.upos, t.head, t.deprel));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootHandling {
    /// The root has no arc and is left out of the average.
    #[default]
    Exclude,
    /// The root counts as a zero-length arc in the denominator, as some
    /// toolkits do.
    ZeroInDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MddOptions {
    /// Leave out tokens tagged `PUNCT`. Positions of the remaining tokens are
    /// not renumbered.
    pub exclude_punct: bool,
    pub root: RootHandling,
}

pub fn sentence_mdd(s: &ConlluSentence) -> Result<f64, MddError> {
    sentence_mdd_with(s, MddOptions::default())
}

pub fn sentence_mdd_with(s: &ConlluSentence, opts: MddOptions) -> Result<f64, MddError> {
    let kept: Vec<&ConlluToken> = s.tokens.iter().filter(|t| !(opts.exclude_punct && t.is_punct())).collect();
    if kept.len() < 2 {
        return Err(MddError::TooShort);
    }
    let mut total = 0usize;
    let mut count = 0usize;
    for t in kept {
        if t.head == 0 {
            if opts.root == RootHandling::ZeroInDenominator {
                count += 1;
            }
            continue;
        }
        total += t.index.abs_diff(t.head);
        count += 1;
    }
    if count == 0 {
        return Err(MddError::TooShort);
    }
    Ok(total as f64 / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MddResult {
    pub sentence_mdds: Vec<f64>,
    pub message_mdd: f64,
}

/// Mean of the sentence values over every sentence with at least two tokens.
pub fn message_mdd<'a, I>(sentences: I, opts: MddOptions) -> Result<MddResult, MddError>
where
    I: IntoIterator<Item = &'a ConlluSentence>,
{
    let sentence_mdds: Vec<f64> = sentences.into_iter().filter_map(|s| sentence_mdd_with(s, opts).ok()).collect();
    if sentence_mdds.is_empty() {
        return Err(MddError::NoScoreableSentence);
    }
    let message_mdd = sentence_mdds.iter().sum::<f64>() / sentence_mdds.len() as f64;
    Ok(MddResult { sentence_mdds, message_mdd })
}

/// Groups sentences by `(chat_id, turn_index)`, in `sent_n` order. Sentences
/// without a usable `sent_id` are returned separately.
pub fn group_by_message(
    sentences: &[ConlluSentence],
) -> (BTreeMap<(String, u32), Vec<&ConlluSentence>>, Vec<&ConlluSentence>) {
    let mut groups: BTreeMap<(String, u32), Vec<&ConlluSentence>> = BTreeMap::new();
    let mut orphans = Vec::new();
    for s in sentences {
        match &s.sent_id {
            Some(id) => groups.entry((id.chat_id.clone(), id.turn_index)).or_default().push(s),
            None => orphans.push(s),
        }
    }
    for group in groups.values_mut() {
        group.sort_by_key(|s| s.sent_id.as_ref().map(|id| id.sent_n));
    }
    (groups, orphans)
}
