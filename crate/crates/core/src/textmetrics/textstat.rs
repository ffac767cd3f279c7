//! Counting rules of the Python `textstat` package (0.7.x, Spanish).
//!
//! These exist so scores can be compared one-to-one against that library.
//! The rules are not linguistically careful: syllables come from TeX
//! hyphenation patterns (one more than the number of break points), sentences
//! of two words or fewer are not counted, and letters include digits.

use std::sync::OnceLock;

use hypher::Lang;
use regex::Regex;

use super::TextStats;

const CONTRACTION_ENDINGS: [&str; 6] = ["t", "s", "d", "ve", "ll", "re"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// `[^\w\s']` removed, and apostrophes removed unless an English contraction
/// ending follows.
fn remove_punctuation(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, c) in text.char_indices() {
        if c == '\'' {
            let rest = &text[i + 1..];
            if CONTRACTION_ENDINGS.iter().any(|e| rest.starts_with(e)) {
                out.push(c);
            }
        } else if is_word_char(c) || c.is_whitespace() {
            out.push(c);
        }
    }
    out
}

fn list_words(text: &str) -> Vec<String> {
    remove_punctuation(text).split_whitespace().map(str::to_string).collect()
}

pub fn count_words(text: &str) -> usize {
    list_words(text).len()
}

pub fn count_syllables(text: &str) -> usize {
    list_words(text)
        .iter()
        .map(|w| hypher::hyphenate(&w.to_lowercase(), Lang::Spanish).count())
        .sum()
}

pub fn count_letters(text: &str) -> usize {
    text.chars().filter(|&c| is_word_char(c)).count()
}

pub fn count_sentences(text: &str) -> usize {
    static SENTENCE: OnceLock<Regex> = OnceLock::new();
    if text.is_empty() {
        return 0;
    }
    let re = SENTENCE.get_or_init(|| Regex::new(r"\b[^.!?]+[.!?]*").expect("valid pattern"));
    let found: Vec<&str> = re.find_iter(text).map(|m| m.as_str()).collect();
    let ignored = found.iter().filter(|s| count_words(s) <= 2).count();
    found.len().saturating_sub(ignored).max(1)
}

/// Counts as `textstat` would produce them. `n_tokens` is the word count,
/// since that library has no separate token notion.
pub fn text_stats(text: &str) -> TextStats {
    let n_words = count_words(text);
    TextStats {
        n_sentences: count_sentences(text),
        n_words,
        n_syllables: count_syllables(text),
        n_letters: count_letters(text),
        n_tokens: n_words,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_sentences_are_not_counted() {
        assert_eq!(count_sentences("Hola. ¿Cómo estás hoy, amigo?"), 1);
        assert_eq!(count_sentences("Sí."), 1);
        assert_eq!(count_sentences(""), 0);
    }

    #[test]
    fn punctuation_and_apostrophes() {
        assert_eq!(list_words("¡Hola, mundo! don't 'x'"), vec!["Hola", "mundo", "don't", "x"]);
        assert_eq!(count_letters("¿Qué tal, 2 veces?"), 12);
    }

    #[test]
    fn hyphenation_undercounts_hiatus() {
        // the patterns have no break in "país", unlike the native counter
        assert_eq!(count_syllables("país"), 1);
        assert_eq!(count_syllables("ciudad"), 2);
        assert_eq!(count_syllables("guerra"), 2);
    }
}
