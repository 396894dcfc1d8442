use std::path::PathBuf;

use patchem_core::arbiter::{AdapterError, ArbiterError};
use patchem_core::coreid::CoreIdError;
use patchem_core::learn::LearnError;
use patchem_core::ParseDiagnostic;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const ADAPTER: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("CSV line {line}: {message}")]
    CsvFormat { line: u64, message: String },
    #[error("line {line}, compound {compound_id}: {diagnostic}")]
    Parse {
        line: u64,
        compound_id: String,
        diagnostic: ParseDiagnostic,
    },
    #[error("patent {patent_id}: duplicate compound id {compound_id}")]
    DuplicateCompoundId { patent_id: String, compound_id: String },
    #[error("patent {0} has more than one core compound")]
    MultipleCores(String),
    #[error("model artifact schema version {found}, expected {expected}")]
    SchemaVersion { found: String, expected: u32 },
    #[error("{context}: {message}")]
    Json { context: String, message: String },
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    CoreId(#[from] CoreIdError),
    #[error(transparent)]
    Arbiter(#[from] ArbiterError),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => exit::USAGE,
            Error::Adapter(_) => exit::ADAPTER,
            Error::Arbiter(ArbiterError::RenderFailed(_) | ArbiterError::EvaluatorProtocol(_)) => exit::ADAPTER,
            _ => exit::DATA,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
