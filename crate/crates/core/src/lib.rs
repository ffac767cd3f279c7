pub mod chat;
pub mod depmetrics;
pub mod langdetect;
pub mod stats;
pub mod surprisal;
pub mod textmetrics;

pub use chat::{ChatError, ChatHistory, Level, Message, PromptSet, Role, Transcript, TranscriptEntry};
pub use langdetect::{Language, LangVerdict};
