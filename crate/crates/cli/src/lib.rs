//! Subcommand implementations behind the `driftlab` binary.

pub mod analyze;
pub mod config;
pub mod io;
pub mod report;
pub mod score;
pub mod simulate;

/// How a command finished. Fatal errors are returned as `Err` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Finished, but some chats, messages or fits failed.
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Partial => 2,
        }
    }
}
