use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing input artifact {0}; run the stage that produces it first")]
    MissingInput(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("stage {stage} failed: {source}")]
    Numerical { stage: &'static str, source: frontmerge::Error },
    #[error("malformed artifact {path}: {why}")]
    Artifact { path: String, why: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => 3,
            _ => 2,
        }
    }
}
