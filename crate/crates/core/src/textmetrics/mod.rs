//! Spanish surface metrics: sentences, tokens, syllables and readability.

mod emoji;
mod readability;
pub mod scales;
mod sentences;
mod syllables;
pub mod textstat;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use emoji::strip_emoji;
pub use readability::{
    fernandez_huerta, gutierrez_de_polini, readability, szigriszt_pazos, szigriszt_pazos_with_base, DegenerateText,
    ReadabilityScores, SzigrisztBase,
};
pub use scales::{interpret, ReadabilityMetric, ScaleBand, ScaleError, ScaleTable, Scales};
pub use sentences::split_sentences;
pub use syllables::count_syllables;
pub use tokenize::{tokenize, words, Token, TokenKind};

/// Raw counts behind the readability formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TextStats {
    pub n_sentences: usize,
    pub n_words: usize,
    pub n_syllables: usize,
    /// Alphabetic codepoints inside words.
    pub n_letters: usize,
    /// Words plus punctuation tokens.
    pub n_tokens: usize,
}

pub fn text_stats(text: &str) -> TextStats {
    let tokens = tokenize(text);
    let mut stats = TextStats {
        n_sentences: split_sentences(text).len(),
        n_tokens: tokens.len(),
        ..TextStats::default()
    };
    for t in tokens.iter().filter(|t| t.is_word()) {
        stats.n_words += 1;
        stats.n_syllables += count_syllables(t.text);
        stats.n_letters += t.text.chars().filter(|c| c.is_alphabetic()).count();
    }
    stats
}

/// Which counting rules feed the formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingProfile {
    /// This crate's tokenizer, sentence splitter and syllabifier.
    #[default]
    Native,
    /// The counting rules of the Python `textstat` package, including its
    /// Szigriszt-Pazos intercept.
    Textstat,
}

impl CountingProfile {
    pub fn stats(self, text: &str) -> TextStats {
        match self {
            CountingProfile::Native => text_stats(text),
            CountingProfile::Textstat => textstat::text_stats(text),
        }
    }

    pub fn szigriszt_base(self) -> SzigrisztBase {
        match self {
            CountingProfile::Native => SzigrisztBase::Published,
            CountingProfile::Textstat => SzigrisztBase::Textstat,
        }
    }

    pub fn score(self, text: &str) -> Result<ReadabilityScores, DegenerateText> {
        readability(&self.stats(text), self.szigriszt_base())
    }
}

impl std::str::FromStr for CountingProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "native" => Ok(CountingProfile::Native),
            "textstat" => Ok(CountingProfile::Textstat),
            other => Err(format!("unknown counting profile {other:?} (expected native or textstat)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_word_sentence() {
        assert_eq!(
            text_stats("Sol."),
            TextStats { n_sentences: 1, n_words: 1, n_syllables: 1, n_letters: 3, n_tokens: 2 }
        );
        assert_eq!(text_stats(""), TextStats::default());
    }

    #[test]
    fn fh_and_sp_differ() {
        let s = text_stats("El perro come carne todos los días. Después duerme en el jardín.");
        let r = readability(&s, SzigrisztBase::Published).unwrap();
        assert!((r.fernandez_huerta - r.szigriszt_pazos).abs() > 1e-6);
        assert!((r.fernandez_huerta - r.szigriszt_pazos).abs() < 10.0);
    }

    #[test]
    fn removed_emoji_do_not_change_word_counts() {
        let text = "¡Hola! 👋 ¿Qué tal estás hoy? 😀😀";
        let a = text_stats(text);
        let b = text_stats(&strip_emoji(text));
        assert_eq!((a.n_words, a.n_syllables, a.n_letters, a.n_sentences), (b.n_words, b.n_syllables, b.n_letters, b.n_sentences));
        assert_eq!(readability(&a, SzigrisztBase::Published), readability(&b, SzigrisztBase::Published));
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn scores_are_case_invariant(text in "[a-zñáéíóú ,.¿?¡!]{1,80}") {
            let lower = text_stats(&text);
            let upper = text_stats(&text.to_uppercase());
            prop_assert_eq!(lower.n_words, upper.n_words);
            prop_assert_eq!(lower.n_syllables, upper.n_syllables);
            prop_assert_eq!(lower.n_letters, upper.n_letters);
        }
    }
}
