//! Word/punctuation tokenizer.
//!
//! Tokens are maximal runs of alphanumeric characters (with combining marks),
//! where `-`, `'` and `’` may join two alphanumeric characters and `.`/`,` may
//! join two digits. Every other non-whitespace character is a one-character
//! punctuation token.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub kind: TokenKind,
}

impl Token<'_> {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

pub(crate) fn is_combining(c: char) -> bool {
    matches!(c as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining(c)
}

fn joins(prev: char, c: char, next: Option<char>) -> bool {
    let Some(next) = next else { return false };
    match c {
        '-' | '\'' | '’' => is_word_char(prev) && next.is_alphanumeric(),
        '.' | ',' => prev.is_ascii_digit() && next.is_ascii_digit(),
        _ => false,
    }
}

pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_word_char(c) {
            let mut j = i + 1;
            while j < chars.len() {
                let ch = chars[j].1;
                if is_word_char(ch) || joins(chars[j - 1].1, ch, chars.get(j + 1).map(|x| x.1)) {
                    j += 1;
                } else {
                    break;
                }
            }
            let end = chars.get(j).map_or(text.len(), |x| x.0);
            tokens.push(Token { text: &text[start..end], kind: TokenKind::Word });
            i = j;
        } else {
            let end = start + c.len_utf8();
            tokens.push(Token { text: &text[start..end], kind: TokenKind::Punct });
            i += 1;
        }
    }
    tokens
}

/// Word tokens only.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    tokenize(text).into_iter().filter(Token::is_word).map(|t| t.text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<&str> {
        tokenize(s).iter().map(|t| t.text).collect()
    }

    #[test]
    fn splits_words_and_punctuation() {
        assert_eq!(texts("Hola, mundo."), vec!["Hola", ",", "mundo", "."]);
        assert_eq!(words("Hola, mundo.").count(), 2);
        assert_eq!(texts("¿Qué?"), vec!["¿", "Qué", "?"]);
        assert_eq!(words("¿Qué?").count(), 1);
    }

    #[test]
    fn compounds_numbers_and_elisions_stay_whole() {
        assert_eq!(texts("café-teatro"), vec!["café-teatro"]);
        assert_eq!(texts("3.5 y 1,000"), vec!["3.5", "y", "1,000"]);
        assert_eq!(texts("l'amour -bien-"), vec!["l'amour", "-", "bien", "-"]);
        assert_eq!(texts("fin."), vec!["fin", "."]);
    }

    #[test]
    fn decomposed_accents_are_part_of_the_word() {
        let nfd = "cafe\u{301} rico";
        assert_eq!(texts(nfd), vec!["cafe\u{301}", "rico"]);
    }

    #[test]
    fn emoji_are_punctuation_tokens() {
        let t = tokenize("Hola 👋");
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].kind, TokenKind::Punct);
    }
}
