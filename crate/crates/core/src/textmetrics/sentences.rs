//! Sentence splitting for Spanish chat text.
//!
//! Boundaries are placed after a run of `.`, `!`, `?` or `…` (plus any
//! closing quotes or brackets) when followed by whitespace, an opening `¿`/`¡`
//! or the end of the text, and at every line break. A single `.` does not end
//! a sentence after a known abbreviation, a single capital initial, a leading
//! list number (`1.`), or when the next word starts in lowercase. Segments
//! without any alphanumeric character are merged into the preceding sentence.

const ABBREVIATIONS: &[&str] = &[
    "sr", "sra", "srta", "sres", "sras", "dr", "dra", "dres", "ud", "uds", "vd", "vds", "lic", "ing",
    "prof", "profa", "pág", "págs", "núm", "av", "avda", "aprox", "ej", "cap", "vol", "ee", "uu",
    "dpto", "tel", "art", "fig", "máx", "mín", "admón", "cía", "sta", "sto", "gral",
];

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '…')
}

fn is_closer(c: char) -> bool {
    matches!(c, ')' | ']' | '}' | '"' | '\'' | '»' | '”' | '’' | '*' | '_')
}

/// Splits `text` into trimmed, non-empty sentences.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    let close = |from: usize, to: usize, spans: &mut Vec<(usize, usize)>| {
        if text[from..to].trim().is_empty() {
            return;
        }
        spans.push((from, to));
    };

    while i < chars.len() {
        let (pos, c) = chars[i];
        if c == '\n' {
            close(start, pos, &mut spans);
            start = pos + 1;
            i += 1;
            continue;
        }
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < chars.len() && is_terminator(chars[i].1) {
            i += 1;
        }
        let single_period = i - run_start == 1 && c == '.';
        while i < chars.len() && is_closer(chars[i].1) {
            i += 1;
        }
        let end = chars.get(i).map_or(text.len(), |&(p, _)| p);
        let next = chars.get(i).map(|&(_, ch)| ch);
        let at_boundary = match next {
            None => true,
            Some(ch) => ch.is_whitespace() || ch == '¿' || ch == '¡',
        };
        if !at_boundary {
            continue;
        }
        if single_period || (i - run_start == 1 && c == '…') {
            let before = &text[start..chars[run_start].0];
            if suppresses_split(before, single_period) || next_word_is_lowercase(&chars[i..]) {
                continue;
            }
        }
        close(start, end, &mut spans);
        start = end;
    }
    close(start, text.len(), &mut spans);

    // merge punctuation-only segments backwards
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
    for (s, e) in spans {
        let has_alnum = text[s..e].chars().any(char::is_alphanumeric);
        match merged.last_mut() {
            Some(last) if !has_alnum => last.1 = e,
            _ => merged.push((s, e)),
        }
    }
    merged
        .into_iter()
        .map(|(s, e)| text[s..e].trim())
        .filter(|s| s.chars().any(char::is_alphanumeric))
        .collect()
}

fn suppresses_split(before: &str, period: bool) -> bool {
    if !period {
        return false;
    }
    let last_word: String = before
        .chars()
        .rev()
        .take_while(|c| c.is_alphanumeric())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    if last_word.is_empty() {
        return false;
    }
    let lower = last_word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    let mut it = last_word.chars();
    if let (Some(first), None) = (it.next(), it.next()) {
        if first.is_uppercase() {
            return true;
        }
    }
    // "1." opening a list item
    if last_word.chars().all(|c| c.is_ascii_digit()) && before.trim() == last_word {
        return true;
    }
    false
}

fn next_word_is_lowercase(rest: &[(usize, char)]) -> bool {
    rest.iter()
        .map(|&(_, c)| c)
        .find(|c| !c.is_whitespace())
        .is_some_and(|c| c.is_lowercase())
}
