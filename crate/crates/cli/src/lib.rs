//! Convergence studies and verification checks for the mixed virtual
//! element solver in [`hrvem`].

pub mod checks;
pub mod config;
pub mod output;
pub mod study;

pub use config::{Norm, StudyConfig};
pub use study::{run_study, StudyReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] hrvem::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
