//! Chat domain types: roles, CEFR levels, messages, per-participant
//! histories and completed transcripts.

mod prompt;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::langdetect::LangVerdict;

pub use prompt::{render_tutor_prompt, student_prompt, PromptSet, Segment, Template};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ChatError {
    #[error("message content is empty after trimming")]
    EmptyContent,
    #[error("alternation violation: a {got} message cannot follow a {last} message")]
    AlternationViolation { last: Role, got: Role },
    #[error("system messages are only allowed at position 0")]
    SystemMisplaced,
    #[error("history owner must be tutor or student, got {0}")]
    InvalidOwner(Role),
    #[error("no prompt template registered for level {0}")]
    MissingTemplate(Level),
    #[error("template references unknown slot {{{0}}}")]
    UnknownSlot(String),
    #[error("template syntax error at byte {offset}: {reason}")]
    TemplateSyntax { offset: usize, reason: &'static str },
    #[error("could not load prompt files: {0}")]
    Load(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    Tutor,
    Student,
}

impl Role {
    /// The conversational counterpart. `System` has none and maps to itself.
    pub fn other(self) -> Role {
        match self {
            Role::Tutor => Role::Student,
            Role::Student => Role::Tutor,
            Role::System => Role::System,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::System => "system",
            Role::Tutor => "tutor",
            Role::Student => "student",
        })
    }
}

/// CEFR proficiency level used as the prompt condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    A1,
    B1,
    C1,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::A1, Level::B1, Level::C1];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::A1 => "A1",
            Level::B1 => "B1",
            Level::C1 => "C1",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown level {0:?}, expected one of A1, B1, C1")]
pub struct ParseLevelError(pub String);

impl FromStr for Level {
    type Err = ParseLevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A1" | "a1" => Ok(Level::A1),
            "B1" | "b1" => Ok(Level::B1),
            "C1" | "c1" => Ok(Level::C1),
            other => Err(ParseLevelError(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
    /// Regenerations consumed before this message was accepted.
    pub retries: u32,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Result<Self, ChatError> {
        Self::with_retries(role, content, 0)
    }

    pub fn with_retries(role: Role, content: impl Into<String>, retries: u32) -> Result<Self, ChatError> {
        let content = content.into();
        if content.trim().is_empty() {
            return Err(ChatError::EmptyContent);
        }
        Ok(Self { role, content, retries })
    }
}

/// The conversation as seen by one participant. `messages[0]` is always the
/// system prompt; the remaining messages alternate between tutor and student.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatHistory {
    owner: Role,
    messages: Vec<Message>,
}

impl ChatHistory {
    pub fn new(owner: Role, system_prompt: impl Into<String>) -> Result<Self, ChatError> {
        if owner == Role::System {
            return Err(ChatError::InvalidOwner(owner));
        }
        let system = Message::new(Role::System, system_prompt)?;
        Ok(Self { owner, messages: vec![system] })
    }

    pub fn owner(&self) -> Role {
        self.owner
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn system_prompt(&self) -> &str {
        &self.messages[0].content
    }

    /// Messages after the system prompt.
    pub fn turns(&self) -> &[Message] {
        &self.messages[1..]
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn push(&mut self, msg: Message) -> Result<(), ChatError> {
        if msg.content.trim().is_empty() {
            return Err(ChatError::EmptyContent);
        }
        if msg.role == Role::System {
            return Err(ChatError::SystemMisplaced);
        }
        let last = self.messages.last().map(|m| m.role).unwrap_or(Role::System);
        if last == msg.role {
            return Err(ChatError::AlternationViolation { last, got: msg.role });
        }
        self.messages.push(msg);
        Ok(())
    }

    /// Consuming variant of [`push`](Self::push).
    pub fn append(mut self, msg: Message) -> Result<Self, ChatError> {
        self.push(msg)?;
        Ok(self)
    }
}

/// One stored message of a transcript with its turn index and, for tutor
/// messages, the language-gate verdicts it passed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub turn_index: u32,
    pub message: Message,
    #[serde(default)]
    pub gate_verdicts: Vec<LangVerdict>,
}

/// A completed (or aborted) dialogue. System prompts are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub chat_id: String,
    pub model_id: String,
    pub level: Level,
    pub opener: String,
    pub entries: Vec<TranscriptEntry>,
    pub created_at: String,
    pub config_fingerprint: String,
}

impl Transcript {
    pub fn tutor_messages(&self) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries.iter().filter(|e| e.message.role == Role::Tutor)
    }

    pub fn total_retries(&self) -> u32 {
        self.tutor_messages().map(|e| e.message.retries).sum()
    }

    /// Checks the opener / alternation / round-count invariants.
    pub fn check_complete(&self, rounds: u32) -> Result<(), String> {
        let first = self.entries.first().ok_or("transcript is empty")?;
        if first.message.role != Role::Student || first.message.content != self.opener {
            return Err("first message is not the student opener".into());
        }
        for (i, e) in self.entries.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::Student } else { Role::Tutor };
            if e.message.role != expected {
                return Err(format!("message {i} has role {} , expected {expected}", e.message.role));
            }
        }
        let tutors = self.tutor_messages().count() as u32;
        if tutors != rounds {
            return Err(format!("{tutors} tutor messages, expected {rounds}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist() -> ChatHistory {
        ChatHistory::new(Role::Tutor, "sys").unwrap()
    }

    #[test]
    fn append_alternating_grows_history() {
        let h = hist()
            .append(Message::new(Role::Student, "Hola").unwrap())
            .unwrap()
            .append(Message::new(Role::Tutor, "¡Hola! ¿Cómo estás?").unwrap())
            .unwrap();
        assert_eq!(h.len(), 3);
    }

    #[test]
    fn append_same_role_twice_is_rejected() {
        let h = hist().append(Message::new(Role::Student, "Hola").unwrap()).unwrap();
        let err = h.append(Message { role: Role::Student, content: "otra vez".into(), retries: 0 });
        assert_eq!(
            err.unwrap_err(),
            ChatError::AlternationViolation { last: Role::Student, got: Role::Student }
        );
    }

    #[test]
    fn empty_content_is_rejected() {
        assert_eq!(Message::new(Role::Tutor, "  \n").unwrap_err(), ChatError::EmptyContent);
        let raw = Message { role: Role::Student, content: " ".into(), retries: 0 };
        assert_eq!(hist().push(raw).unwrap_err(), ChatError::EmptyContent);
    }

    #[test]
    fn system_only_at_position_zero() {
        let mut h = hist();
        let sys = Message::new(Role::System, "again").unwrap();
        assert_eq!(h.push(sys).unwrap_err(), ChatError::SystemMisplaced);
        assert!(ChatHistory::new(Role::System, "x").is_err());
    }

    #[test]
    fn level_parsing() {
        assert_eq!("B1".parse::<Level>().unwrap(), Level::B1);
        assert!("D1".parse::<Level>().is_err());
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn random_appends_keep_alternation(roles in proptest::collection::vec(0u8..3, 0..40)) {
            let mut h = hist();
            for r in roles {
                let role = match r { 0 => Role::System, 1 => Role::Tutor, _ => Role::Student };
                let _ = h.push(Message { role, content: "x".into(), retries: 0 });
            }
            prop_assert_eq!(h.messages()[0].role, Role::System);
            for pair in h.turns().windows(2) {
                prop_assert_ne!(pair[0].role, pair[1].role);
            }
            prop_assert!(h.turns().iter().all(|m| m.role != Role::System));
        }
    }
}
