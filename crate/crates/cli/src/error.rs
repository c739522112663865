use thiserror::Error;

use subdiff_core::homogenize::HomogenizeError;
use subdiff_core::mesh::MeshError;
use subdiff_core::studies::StudyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Check(_) => 5,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Morphology(_) | MeshError::Pairing(_) => CliError::Config(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        match e {
            StudyError::Mesh(m) => m.into(),
            StudyError::Setup(s) => CliError::Config(s),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<HomogenizeError> for CliError {
    fn from(e: HomogenizeError) -> Self {
        match e {
            HomogenizeError::Mesh(m) => m.into(),
            HomogenizeError::Config(_) | HomogenizeError::Domain(_) => CliError::Config(e.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}
