//! Emoji removal.

/// Emoji pictograph blocks plus the joiners and modifiers used to build
/// emoji sequences.
fn is_emoji(c: char) -> bool {
    matches!(
        c as u32,
        0x1F300..=0x1F5FF // misc symbols & pictographs (includes skin-tone modifiers)
            | 0x1F600..=0x1F64F // emoticons
            | 0x1F680..=0x1F6FF // transport & map
            | 0x1F900..=0x1F9FF // supplemental symbols & pictographs
            | 0x1FA70..=0x1FAFF // symbols & pictographs extended-A
            | 0x1F1E6..=0x1F1FF // regional indicators
            | 0x2600..=0x26FF // misc symbols
            | 0x2700..=0x27BF // dingbats
            | 0xFE00..=0xFE0F // variation selectors
            | 0x200D // zero width joiner
            | 0x20E3 // combining enclosing keycap
            | 0xE0020..=0xE007F // tag characters
    )
}

/// Removes emoji codepoints, leaving every other character untouched.
pub fn strip_emoji(text: &str) -> String {
    text.chars().filter(|&c| !is_emoji(c)).collect()
}
