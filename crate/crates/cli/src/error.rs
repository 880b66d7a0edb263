use fcm_core::{DecodeError, EncodeError, EvalError, FcmError, FormatError, LlmError};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONTRACT: i32 = 2;
pub const EXIT_REMOTE: i32 = 3;
pub const EXIT_REPLAY_MISS: i32 = 4;
pub const EXIT_SCHEMA: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Fcm(#[from] FcmError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

fn llm_code(e: &LlmError) -> i32 {
    match e {
        LlmError::ReplayMiss { .. } => EXIT_REPLAY_MISS,
        LlmError::Schema { .. } => EXIT_SCHEMA,
        LlmError::InvalidConfig(_) | LlmError::MissingCredential { .. } => EXIT_CONTRACT,
        LlmError::Cache(_) => EXIT_IO,
        LlmError::Auth { .. } | LlmError::Remote { .. } | LlmError::Network { .. } | LlmError::BadResponse(_) => {
            EXIT_REMOTE
        }
    }
}

impl CliError {
    pub fn contract(message: impl Into<String>) -> Self {
        CliError::Contract(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Contract(_) | CliError::Fcm(_) | CliError::Eval(_) => EXIT_CONTRACT,
            CliError::Format(FormatError::Io { .. } | FormatError::Image(_)) => EXIT_IO,
            CliError::Format(_) => EXIT_SCHEMA,
            CliError::Encode(EncodeError::Llm(e)) => llm_code(e),
            CliError::Encode(EncodeError::InvalidTable(_)) => EXIT_SCHEMA,
            CliError::Encode(_) => EXIT_CONTRACT,
            CliError::Decode(DecodeError::Stage { source, .. }) => llm_code(source),
            CliError::Decode(_) => EXIT_CONTRACT,
            CliError::Llm(e) => llm_code(e),
        }
    }
}
