use imcf_lab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or input data; exit code 2.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The computation itself broke down; exit code 1.
    #[error("run failed: {0}")]
    Failed(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Domain(_)
            | LabError::LengthMismatch { .. }
            | LabError::Construction(_)
            | LabError::NotMeanConvex { .. } => CliError::Invalid(e.to_string()),
            LabError::Geometry { .. } | LabError::Flow { .. } | LabError::Diagnostic(_) => {
                CliError::Failed(e.to_string())
            }
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}
