//! Sentence-level language identification for the tutor output gate.
//!
//! Mandarin is flagged by any CJK ideograph. English against Spanish is a
//! log-likelihood score over two small lexicons plus orthographic cues; a
//! sentence is English only with enough evidence, so short interjections such
//! as "OK" or "Hello!" never trip the gate.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::textmetrics::{split_sentences, words};

const SPANISH_WORDS: &str = include_str!("../data/stopwords_es.txt");
const ENGLISH_WORDS: &str = include_str!("../data/stopwords_en.txt");

/// Minimum score in favour of English for sentences of three or more words.
pub const ENGLISH_MARGIN: f64 = 2.0;
const LEXICON_WEIGHT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "es")]
    Spanish,
    #[serde(rename = "en")]
    English,
    #[serde(rename = "zh")]
    Mandarin,
    #[serde(rename = "und")]
    Unknown,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::Spanish => "es",
            Language::English => "en",
            Language::Mandarin => "zh",
            Language::Unknown => "und",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language {0:?}")]
pub struct ParseLanguageError(pub String);

impl FromStr for Language {
    type Err = ParseLanguageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "es" | "spa" | "spanish" => Ok(Language::Spanish),
            "en" | "eng" | "english" => Ok(Language::English),
            "zh" | "cmn" | "zho" | "mandarin" | "chinese" => Ok(Language::Mandarin),
            "und" | "unknown" => Ok(Language::Unknown),
            _ => Err(ParseLanguageError(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangVerdict {
    pub sentence: String,
    pub detected: Language,
    pub confidence: f64,
}

struct Lexicons {
    spanish: HashSet<&'static str>,
    english: HashSet<&'static str>,
}

fn parse_list(src: &'static str) -> HashSet<&'static str> {
    src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect()
}

fn lexicons() -> &'static Lexicons {
    static LEX: OnceLock<Lexicons> = OnceLock::new();
    LEX.get_or_init(|| Lexicons { spanish: parse_list(SPANISH_WORDS), english: parse_list(ENGLISH_WORDS) })
}

pub fn is_cjk_ideograph(c: char) -> bool {
    matches!(c as u32,
        0x4E00..=0x9FFF | 0x3400..=0x4DBF | 0x20000..=0x2A6DF | 0x2A700..=0x2EBEF | 0xF900..=0xFAFF | 0x30000..=0x3134F)
}

fn orthographic_score(word: &str) -> f64 {
    let mut s = 0.0;
    if word.chars().any(|c| matches!(c, 'ñ' | 'á' | 'é' | 'í' | 'ó' | 'ú' | 'ü')) {
        s -= 2.5;
    }
    if ["ción", "mente", "ll", "rr", "qu"].iter().any(|p| word.contains(p)) {
        s -= 1.0;
    }
    if ["th", "wh", "sh", "ck", "w", "k"].iter().any(|p| word.contains(p)) || word.ends_with("ing") {
        s += 1.0;
    }
    if word.contains('\'') || word.contains('’') {
        s += 1.0;
    }
    s
}

/// Log-likelihood-style score of English over Spanish; positive favours English.
fn english_score(sentence: &str, tokens: &[String]) -> (f64, bool) {
    let lex = lexicons();
    let mut score = 0.0;
    let mut all_english_only = !tokens.is_empty();
    for w in tokens {
        let key = w.replace('’', "'");
        let en = lex.english.contains(key.as_str());
        let es = lex.spanish.contains(key.as_str());
        match (en, es) {
            (true, false) => score += LEXICON_WEIGHT,
            (false, true) => score -= LEXICON_WEIGHT,
            _ => {}
        }
        if !(en && !es) {
            all_english_only = false;
        }
        score += orthographic_score(&key);
    }
    if sentence.contains(['¿', '¡']) {
        score -= 3.0;
    }
    (score, all_english_only)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Verdict for one sentence.
pub fn detect(sentence: &str) -> LangVerdict {
    let verdict = |detected, confidence| LangVerdict { sentence: sentence.to_string(), detected, confidence };
    if sentence.chars().any(is_cjk_ideograph) {
        return verdict(Language::Mandarin, 1.0);
    }
    let tokens: Vec<String> = words(sentence)
        .filter(|w| w.chars().any(char::is_alphabetic))
        .map(str::to_lowercase)
        .collect();
    if tokens.is_empty() {
        return verdict(Language::Unknown, 0.0);
    }
    let (score, all_english_only) = english_score(sentence, &tokens);
    let english = (tokens.len() >= 3 && score > ENGLISH_MARGIN) || (tokens.len() >= 2 && all_english_only);
    if english {
        verdict(Language::English, sigmoid(score.abs()))
    } else if score < 0.0 {
        verdict(Language::Spanish, sigmoid(score.abs()))
    } else {
        verdict(Language::Unknown, 0.5)
    }
}

/// Splits `text` into sentences and passes it only if no sentence is detected
/// as one of `banned`.
pub fn language_gate(text: &str, banned: &BTreeSet<Language>) -> (bool, Vec<LangVerdict>) {
    let verdicts: Vec<LangVerdict> = split_sentences(text).into_iter().map(detect).collect();
    let pass = verdicts.iter().all(|v| !banned.contains(&v.detected));
    (pass, verdicts)
}

/// English and Mandarin.
pub fn default_banned() -> BTreeSet<Language> {
    BTreeSet::from([Language::English, Language::Mandarin])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spanish_passes() {
        let (pass, v) = language_gate("Hola. ¿Cómo estás?", &default_banned());
        assert!(pass);
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn parenthetical_english_fails_on_second_sentence() {
        let (pass, v) = language_gate("Hola. (Hello, how are you today my friend?)", &default_banned());
        assert!(!pass);
        assert_eq!(v[1].detected, Language::English);
        assert_ne!(v[0].detected, Language::English);
    }

    #[test]
    fn cjk_is_mandarin() {
        let (pass, v) = language_gate("你好，我们开始吧。", &default_banned());
        assert!(!pass);
        assert_eq!(v[0].detected, Language::Mandarin);
    }

    #[test]
    fn short_english_interjections_do_not_trip() {
        for s in ["OK.", "Hello!", "¡Wow!", "Vale, OK.", "Me gusta el rock.", "Mi amigo se llama John."] {
            assert_ne!(detect(s).detected, Language::English, "{s}");
        }
        assert_eq!(detect("Hello there").detected, Language::English);
    }

    #[test]
    fn spanish_sentences_are_spanish() {
        for s in [
            "Hoy vamos a practicar los verbos.",
            "¿Qué te gusta hacer los fines de semana?",
            "Me encanta leer novelas históricas.",
            "Perfecto, ahora dime cómo se dice esto.",
        ] {
            assert_eq!(detect(s).detected, Language::Spanish, "{s}");
        }
    }

    #[test]
    fn english_sentences_are_english() {
        for s in [
            "Let's practice some vocabulary today.",
            "This is a great answer, well done.",
            "What did you do over the weekend?",
        ] {
            assert_eq!(detect(s).detected, Language::English, "{s}");
        }
    }

    #[test]
    fn banned_set_is_respected() {
        let (pass, _) = language_gate("This is a great answer, well done.", &BTreeSet::new());
        assert!(pass);
    }

    #[test]
    fn codes_round_trip() {
        for l in [Language::Spanish, Language::English, Language::Mandarin, Language::Unknown] {
            assert_eq!(l.code().parse::<Language>().unwrap(), l);
        }
        assert!("klingon".parse::<Language>().is_err());
    }
}
