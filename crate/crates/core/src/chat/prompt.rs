//! System prompt templates.
//!
//! A template is UTF-8 text with `{SLOT}` placeholders; `{{` and `}}` are
//! literal braces. Slot values come from a per-level table.

use std::collections::BTreeMap;
use std::path::Path;

use super::{ChatError, Level};

const TUTOR_TXT: &str = include_str!("../../templates/tutor.txt");
const STUDENT_TXT: &str = include_str!("../../templates/student.txt");
const LEVELS_TOML: &str = include_str!("../../templates/levels.toml");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Literal(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    segments: Vec<Segment>,
}

impl Template {
    pub fn parse(src: &str) -> Result<Self, ChatError> {
        let mut segments = Vec::new();
        let mut lit = String::new();
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'{' if bytes.get(i + 1) == Some(&b'{') => {
                    lit.push('{');
                    i += 2;
                }
                b'}' if bytes.get(i + 1) == Some(&b'}') => {
                    lit.push('}');
                    i += 2;
                }
                b'{' => {
                    let close = src[i + 1..]
                        .find('}')
                        .ok_or(ChatError::TemplateSyntax { offset: i, reason: "unclosed slot" })?;
                    let name = &src[i + 1..i + 1 + close];
                    if name.is_empty() || !name.chars().all(|c| c.is_ascii_uppercase() || c == '_' || c.is_ascii_digit()) {
                        return Err(ChatError::TemplateSyntax { offset: i, reason: "invalid slot name" });
                    }
                    if !lit.is_empty() {
                        segments.push(Segment::Literal(std::mem::take(&mut lit)));
                    }
                    segments.push(Segment::Slot(name.to_string()));
                    i += close + 2;
                }
                b'}' => return Err(ChatError::TemplateSyntax { offset: i, reason: "unmatched '}'" }),
                _ => {
                    // advance one whole UTF-8 char
                    let ch = src[i..].chars().next().expect("in bounds");
                    lit.push(ch);
                    i += ch.len_utf8();
                }
            }
        }
        if !lit.is_empty() {
            segments.push(Segment::Literal(lit));
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(n) => Some(n.as_str()),
            Segment::Literal(_) => None,
        })
    }

    pub fn render(&self, values: &BTreeMap<String, String>) -> Result<String, ChatError> {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => out.push_str(s),
                Segment::Slot(name) => out.push_str(
                    values.get(name).ok_or_else(|| ChatError::UnknownSlot(name.clone()))?,
                ),
            }
        }
        Ok(out)
    }
}

/// The tutor template, the per-level slot table and the student prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    tutor: Template,
    student: String,
    slots: BTreeMap<Level, BTreeMap<String, String>>,
}

impl Default for PromptSet {
    /// The built-in English prompts.
    fn default() -> Self {
        Self::from_sources(TUTOR_TXT, STUDENT_TXT, LEVELS_TOML).expect("bundled prompt files are valid")
    }
}

impl PromptSet {
    pub fn from_sources(tutor: &str, student: &str, levels_toml: &str) -> Result<Self, ChatError> {
        let tutor = Template::parse(tutor)?;
        let raw: BTreeMap<String, BTreeMap<String, String>> =
            toml::from_str(levels_toml).map_err(|e| ChatError::Load(e.to_string()))?;
        let mut slots = BTreeMap::new();
        for (key, values) in raw {
            let level: Level = key.parse().map_err(|e: super::ParseLevelError| ChatError::Load(e.to_string()))?;
            slots.insert(level, values);
        }
        let student = student.trim_end_matches(['\n', '\r']).to_string();
        if student.trim().is_empty() {
            return Err(ChatError::EmptyContent);
        }
        Ok(Self { tutor, student, slots })
    }

    /// Loads `tutor.txt`, `student.txt` and `levels.toml` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, ChatError> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|e| ChatError::Load(format!("{}: {e}", dir.join(name).display())))
        };
        Self::from_sources(&read("tutor.txt")?, &read("student.txt")?, &read("levels.toml")?)
    }

    pub fn tutor_template(&self) -> &Template {
        &self.tutor
    }

    pub fn slot_values(&self, level: Level) -> Option<&BTreeMap<String, String>> {
        self.slots.get(&level)
    }

    pub fn render_tutor_prompt(&self, level: Level) -> Result<String, ChatError> {
        let values = self.slots.get(&level).ok_or(ChatError::MissingTemplate(level))?;
        self.tutor.render(values)
    }

    pub fn student_prompt(&self) -> &str {
        &self.student
    }
}

/// The student system prompt from the built-in templates.
pub fn student_prompt() -> &'static str {
    STUDENT_TXT.trim_end_matches(['\n', '\r'])
}

/// Tutor system prompt from the built-in English templates.
pub fn render_tutor_prompt(level: Level) -> Result<String, ChatError> {
    PromptSet::default().render_tutor_prompt(level)
}
