use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Library(#[from] vortex_rings::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
