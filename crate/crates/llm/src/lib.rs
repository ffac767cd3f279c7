//! Talking to language models: a blocking chat-completion client, scoring
//! adapters for surprisal, deterministic mock backends and the dialogue
//! simulator built on top of them.

pub mod client;
pub mod mock;
mod params;
pub mod persist;
pub mod scorer;
pub mod simulator;

pub use client::{ChatBackend, ChatRequest, ChatResponse, EndpointConfig, HttpBackend, RequestMeta, WireMessage, WireRole};
pub use params::SamplingParams;
pub use simulator::{run_campaign, run_dialogue, CampaignResult, SimError, SimulationConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("endpoint unreachable after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("model returned an empty completion")]
    EmptyCompletion,
    #[error("endpoint does not support this request: {0}")]
    UnsupportedCapability(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{0}")]
    Io(String),
}
