//! Simulation campaigns, verification suites and timing tables for Hawkes
//! clusters, behind the `hawkes-cluster` command.

pub mod bench;
pub mod config;
pub mod simulate;
pub mod verify;

/// Exit code for a verification failure or runtime error.
pub const EXIT_FAILURE: u8 = 1;
/// Exit code for bad flags or an invalid configuration.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Model(#[from] hawkes_cluster::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}
