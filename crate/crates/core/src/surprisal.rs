//! Message surprisal: per-sentence mean negative log-probability, averaged
//! over the sentences of a message.

use serde::{Deserialize, Serialize};

use crate::textmetrics::split_sentences;

/// Token log-probabilities for one piece of text, as returned by a scoring
/// model. Special tokens the model adds itself are expected to be dropped by
/// the adapter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TokenScores {
    pub tokens: Vec<String>,
    pub logprobs: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    /// The scorer cannot be reached at all; the message cannot be scored.
    #[error("scorer unavailable: {0}")]
    Unavailable(String),
    /// The scorer refused this particular input.
    #[error("scorer rejected input: {0}")]
    Rejected(String),
}

pub trait Scorer {
    fn score(&self, text: &str) -> Result<TokenScores, ScoreError>;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, text: &str) -> Result<TokenScores, ScoreError> {
        (**self).score(text)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn score(&self, text: &str) -> Result<TokenScores, ScoreError> {
        (**self).score(text)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SurprisalError {
    #[error("no token log-probabilities to average")]
    EmptyScore,
    #[error("scorer unavailable: {0}")]
    ScorerUnavailable(String),
    #[error("no sentence in the message could be scored")]
    NoScoreableSentence,
}

/// `−mean(logprobs)`.
pub fn sentence_surprisal(logprobs: &[f64]) -> Result<f64, SurprisalError> {
    if logprobs.is_empty() {
        return Err(SurprisalError::EmptyScore);
    }
    Ok(-logprobs.iter().sum::<f64>() / logprobs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSentence {
    pub sentence: String,
    pub token_logprobs: Vec<f64>,
    pub surprisal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageSurprisal {
    pub sentences: Vec<ScoredSentence>,
    /// Sentences the scorer rejected or returned nothing for.
    pub skipped: Vec<String>,
    pub value: f64,
}

/// Scores every sentence of `msg` on its own and averages the results.
pub fn message_surprisal<S: Scorer + ?Sized>(msg: &str, scorer: &S) -> Result<MessageSurprisal, SurprisalError> {
    let mut sentences = Vec::new();
    let mut skipped = Vec::new();
    for sent in split_sentences(msg) {
        match scorer.score(sent) {
            Ok(scores) => match sentence_surprisal(&scores.logprobs) {
                Ok(surprisal) => sentences.push(ScoredSentence {
                    sentence: sent.to_string(),
                    token_logprobs: scores.logprobs,
                    surprisal,
                }),
                Err(_) => {
                    tracing::warn!(sentence = sent, "scorer returned no tokens; skipped");
                    skipped.push(sent.to_string());
                }
            },
            Err(ScoreError::Unavailable(e)) => return Err(SurprisalError::ScorerUnavailable(e)),
            Err(ScoreError::Rejected(e)) => {
                tracing::warn!(sentence = sent, error = %e, "scorer rejected sentence; skipped");
                skipped.push(sent.to_string());
            }
        }
    }
    if sentences.is_empty() {
        return Err(SurprisalError::NoScoreableSentence);
    }
    let value = sentences.iter().map(|s| s.surprisal).sum::<f64>() / sentences.len() as f64;
    Ok(MessageSurprisal { sentences, skipped, value })
}
