use std::io;
use std::path::PathBuf;

use thiserror::Error;
use twodrug::{IntegrateError, PortraitError, ValidationErrors};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Parameters(#[from] ValidationErrors),
    #[error("invalid sweep axis: {0}")]
    InvalidSweepAxis(String),
    #[error("--seedless is reserved: no computation here draws random numbers")]
    SeedlessReserved,
    #[error("{0} requires --config")]
    MissingConfig(&'static str),
    #[error(transparent)]
    Portrait(#[from] PortraitError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("every simulation run failed")]
    AllRunsFailed,
}

impl CliError {
    /// 1 for validation problems, 2 for runtime and I/O failures. Verification
    /// mismatches are not errors; they set exit code 3 on the outcome.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_)
            | Self::Parameters(_)
            | Self::InvalidSweepAxis(_)
            | Self::SeedlessReserved
            | Self::MissingConfig(_)
            | Self::Portrait(PortraitError::EmptyWindow(_))
            | Self::Integrate(IntegrateError::InvalidOptions(_))
            | Self::Integrate(IntegrateError::InvalidInitialState(_)) => 1,
            Self::Read { .. } | Self::Write { .. } | Self::Portrait(_) | Self::Integrate(_) | Self::AllRunsFailed => 2,
        }
    }
}
