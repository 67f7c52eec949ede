use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants are grouped by the stage that produces them so that front ends
/// can map them to exit codes without string matching.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Csv {
        line: u64,
        column: usize,
        message: String,
    },
    #[error("knowledge base line {line}: {message}")]
    KbSyntax { line: usize, message: String },
    #[error("unknown {kind} `{name}`")]
    Lookup { kind: &'static str, name: String },
    #[error("inconsistent knowledge base: both {feature}({individual}) and not {feature}({individual}) are derivable")]
    Inconsistent { individual: String, feature: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("cannot fit model: {0}")]
    Fit(String),
    #[error("invalid value for {name}: {message}")]
    InvalidArgument { name: &'static str, message: String },
    #[error("rule extraction failed: {0}")]
    Extraction(String),
    #[error("problem generation exhausted after {attempts} candidates: {constraint}")]
    Exhausted { attempts: usize, constraint: String },
    #[error("model document: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        message: message.into(),
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
