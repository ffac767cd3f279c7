//! Spanish readability formulas.

use serde::{Deserialize, Serialize};

use super::TextStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("readability needs at least one word and one sentence (got {words} words, {sentences} sentences)")]
pub struct DegenerateText {
    pub words: usize,
    pub sentences: usize,
}

/// Whether a published constant or the one used by Textstat should be used
/// for the Szigriszt-Pazos intercept. Textstat reuses the Fernández Huerta
/// base of 206.84 where the published formula has 206.835.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SzigrisztBase {
    #[default]
    Published,
    Textstat,
}

impl SzigrisztBase {
    pub fn value(self) -> f64 {
        match self {
            SzigrisztBase::Published => 206.835,
            SzigrisztBase::Textstat => 206.84,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScores {
    pub fernandez_huerta: f64,
    pub szigriszt_pazos: f64,
    pub gutierrez_de_polini: f64,
}

fn check(stats: &TextStats) -> Result<(i128, i128), DegenerateText> {
    if stats.n_words == 0 || stats.n_sentences == 0 {
        return Err(DegenerateText { words: stats.n_words, sentences: stats.n_sentences });
    }
    Ok((stats.n_words as i128, stats.n_sentences as i128))
}

/// `num / den` rounded once. Both operands convert to `f64` exactly below
/// 2^53, which covers any realistic text, so decimal coefficients do not pick
/// up binary rounding error along the way.
fn ratio(num: i128, den: i128) -> f64 {
    num as f64 / den as f64
}

/// `base − a·(X/W) − b·(W/T)` with every coefficient given as an integer over
/// a common `scale`.
fn linear_score(scale: i128, base: i128, a: i128, x: i128, b: i128, w: i128, t: i128) -> f64 {
    ratio(base * w * t - a * x * t - b * w * w, scale * w * t)
}

/// `206.84 − 60·(S/W) − 1.02·(W/T)`: the corrected Fernández Huerta formula.
pub fn fernandez_huerta(stats: &TextStats) -> Result<f64, DegenerateText> {
    let (w, t) = check(stats)?;
    Ok(linear_score(100, 20684, 6000, stats.n_syllables as i128, 102, w, t))
}

/// `206.835 − 62.3·(S/W) − (W/T)`.
pub fn szigriszt_pazos(stats: &TextStats) -> Result<f64, DegenerateText> {
    szigriszt_pazos_with_base(stats, SzigrisztBase::Published)
}

pub fn szigriszt_pazos_with_base(stats: &TextStats, base: SzigrisztBase) -> Result<f64, DegenerateText> {
    let (w, t) = check(stats)?;
    let base = match base {
        SzigrisztBase::Published => 206_835,
        SzigrisztBase::Textstat => 206_840,
    };
    Ok(linear_score(1000, base, 62_300, stats.n_syllables as i128, 1000, w, t))
}

/// `95.2 − 9.7·(L/W) − 0.35·(W/T)`.
pub fn gutierrez_de_polini(stats: &TextStats) -> Result<f64, DegenerateText> {
    let (w, t) = check(stats)?;
    Ok(linear_score(100, 9520, 970, stats.n_letters as i128, 35, w, t))
}

pub fn readability(stats: &TextStats, base: SzigrisztBase) -> Result<ReadabilityScores, DegenerateText> {
    Ok(ReadabilityScores {
        fernandez_huerta: fernandez_huerta(stats)?,
        szigriszt_pazos: szigriszt_pazos_with_base(stats, base)?,
        gutierrez_de_polini: gutierrez_de_polini(stats)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(sentences: usize, words: usize, syllables: usize, letters: usize) -> TextStats {
        TextStats { n_sentences: sentences, n_words: words, n_syllables: syllables, n_letters: letters, n_tokens: words }
    }

    #[test]
    fn substitution_identities_are_exact() {
        let s = stats(1, 1, 1, 3);
        assert_eq!(fernandez_huerta(&s).unwrap(), 145.82);
        assert_eq!(szigriszt_pazos(&s).unwrap(), 143.535);
        assert_eq!(gutierrez_de_polini(&s).unwrap(), 65.75);
    }

    #[test]
    fn textstat_base_differs_by_half_a_hundredth() {
        let s = stats(3, 40, 80, 190);
        let d = szigriszt_pazos_with_base(&s, SzigrisztBase::Textstat).unwrap() - szigriszt_pazos(&s).unwrap();
        assert!((d - 0.005).abs() < 1e-9);
    }

    #[test]
    fn degenerate_text_is_an_error() {
        assert!(fernandez_huerta(&stats(0, 0, 0, 0)).is_err());
        assert!(szigriszt_pazos(&stats(1, 0, 0, 0)).is_err());
        assert!(gutierrez_de_polini(&stats(0, 3, 3, 9)).is_err());
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn scores_decrease_as_words_get_longer(words in 1usize..200, sentences in 1usize..20, syl in 1usize..600, extra in 1usize..50) {
            let a = stats(sentences, words, syl, syl * 2);
            let b = stats(sentences, words, syl + extra, (syl + extra) * 2);
            prop_assert!(fernandez_huerta(&b).unwrap() < fernandez_huerta(&a).unwrap());
            prop_assert!(szigriszt_pazos(&b).unwrap() < szigriszt_pazos(&a).unwrap());
            prop_assert!(gutierrez_de_polini(&b).unwrap() < gutierrez_de_polini(&a).unwrap());
        }
    }
}
