//! Spanish syllable counting.
//!
//! Counting works on vowel nuclei. Within a run of adjacent vowels (an `h`
//! between two vowels does not break the run) every strong vowel (a, e, o)
//! and every accented weak vowel (í, ú) is its own nucleus; unaccented weak
//! vowels (i, u, ü, and `y` when not followed by a vowel) glide onto a
//! neighbour, so a run made only of them is a single nucleus. The `u` of
//! `qu`/`gu` before e or i is silent.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sound {
    Strong,
    Weak,
    AccentedWeak,
    H,
    Consonant,
}

fn base_class(c: char) -> Sound {
    match c {
        'a' | 'e' | 'o' | 'á' | 'é' | 'ó' | 'à' | 'è' | 'ò' | 'â' | 'ê' | 'ô' | 'ä' | 'ë' | 'ö' => Sound::Strong,
        'i' | 'u' | 'ü' | 'ï' | 'î' | 'û' => Sound::Weak,
        'í' | 'ú' | 'ì' | 'ù' => Sound::AccentedWeak,
        'h' => Sound::H,
        _ => Sound::Consonant,
    }
}

fn is_front_vowel(c: char) -> bool {
    matches!(c, 'e' | 'i' | 'é' | 'í')
}

fn classify(letters: &[char]) -> Vec<Sound> {
    let mut out: Vec<Sound> = letters.iter().map(|&c| base_class(c)).collect();
    for i in 0..letters.len() {
        match letters[i] {
            'u' if i > 0
                && matches!(letters[i - 1], 'q' | 'g')
                && letters.get(i + 1).copied().is_some_and(is_front_vowel) =>
            {
                out[i] = Sound::Consonant;
            }
            'y' => {
                let next_is_vowel = letters
                    .get(i + 1)
                    .is_some_and(|&n| matches!(base_class(n), Sound::Strong | Sound::Weak | Sound::AccentedWeak));
                if !next_is_vowel {
                    out[i] = Sound::Weak;
                }
            }
            _ => {}
        }
    }
    out
}

fn is_vowel(s: Sound) -> bool {
    matches!(s, Sound::Strong | Sound::Weak | Sound::AccentedWeak)
}

fn count_segment(letters: &[char]) -> usize {
    let sounds = classify(letters);
    let mut total = 0;
    let mut i = 0;
    while i < sounds.len() {
        if !is_vowel(sounds[i]) {
            i += 1;
            continue;
        }
        let mut nuclei = 0;
        let mut any = false;
        while i < sounds.len() {
            match sounds[i] {
                Sound::Strong | Sound::AccentedWeak => {
                    nuclei += 1;
                    any = true;
                }
                Sound::Weak => any = true,
                Sound::H if sounds.get(i + 1).copied().is_some_and(is_vowel) => {}
                _ => break,
            }
            i += 1;
        }
        if any {
            total += nuclei.max(1);
        }
    }
    total
}

/// Number of syllables in a word. Words without any vowel (including
/// digit-only tokens) count as one syllable. Hyphenated compounds are the sum
/// of their parts.
pub fn count_syllables(word: &str) -> usize {
    let lower = word.to_lowercase();
    let mut total = 0;
    let mut segment: Vec<char> = Vec::new();
    for c in lower.chars() {
        if c.is_alphabetic() {
            segment.push(c);
        } else if super::tokenize::is_combining(c) {
            // fold a decomposed acute accent onto its base vowel
            if let Some(last) = segment.last_mut() {
                if c == '\u{301}' {
                    *last = match *last {
                        'a' => 'á',
                        'e' => 'é',
                        'i' => 'í',
                        'o' => 'ó',
                        'u' => 'ú',
                        other => other,
                    };
                } else if c == '\u{308}' && *last == 'u' {
                    *last = 'ü';
                }
            }
        } else {
            total += count_segment(&segment);
            segment.clear();
        }
    }
    total += count_segment(&segment);
    total.max(1)
}
