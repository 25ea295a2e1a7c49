use qwitness_core::quantum::QuantumError;
use qwitness_core::PipelineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    CapExceeded(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Domain(_) => 2,
            CliError::CapExceeded(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::CapExceeded { .. } => CliError::CapExceeded(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Quantum(QuantumError::CapExceeded { .. }) => CliError::CapExceeded(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}
