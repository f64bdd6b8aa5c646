//! Stepped-frequency time-reversal imaging of a point target beside a
//! reflecting wall.
//!
//! The crate synthesizes monostatic echoes with an analytic two-dimensional
//! multipath model ([`forward`]), folds the frequency samples into the
//! frequency-frequency matrix and decomposes it ([`subspace`]), and forms
//! backprojection and noise-subspace images ([`imaging`]) that are scored by
//! [`metrics`]. [`pipeline`] ties the stages together for the command-line
//! front end.

pub mod config;
pub mod forward;
pub mod imaging;
pub mod metrics;
pub mod pipeline;
pub mod scene;
pub mod specfun;
pub mod subspace;
pub mod waveform;

use std::path::PathBuf;

use thiserror::Error;

use config::ConfigError;
use forward::ForwardError;
use imaging::ImagingError;
use metrics::MetricsError;
use scene::SceneError;
use specfun::SpecFunError;
use subspace::SubspaceError;
use waveform::WaveformError;

/// Any failure, tagged with the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("scene: {0}")]
    Scene(#[from] SceneError),
    #[error("waveform: {0}")]
    Waveform(#[from] WaveformError),
    #[error("specfun: {0}")]
    SpecFun(#[from] SpecFunError),
    #[error("forward: {0}")]
    Forward(ForwardError),
    #[error("subspace: {0}")]
    Subspace(#[from] SubspaceError),
    #[error("imaging: {0}")]
    Imaging(ImagingError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("i/o: {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("usage: {0}")]
    Usage(String),
}

impl From<ForwardError> for Error {
    fn from(e: ForwardError) -> Self {
        match e {
            ForwardError::Scene(s) => Error::Scene(s),
            ForwardError::SpecFun(s) => Error::SpecFun(s),
            other => Error::Forward(other),
        }
    }
}

impl From<ImagingError> for Error {
    fn from(e: ImagingError) -> Self {
        match e {
            ImagingError::Forward(f) => f.into(),
            other => Error::Imaging(other),
        }
    }
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

impl Error {
    /// Name of the module the error originated in.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Config(ConfigError::Scene(_)) | Error::Scene(_) => "scene",
            Error::Config(ConfigError::Waveform(_)) | Error::Waveform(_) => "waveform",
            Error::Config(_) => "config",
            Error::SpecFun(_) => "specfun",
            Error::Forward(_) => "forward",
            Error::Subspace(_) => "subspace",
            Error::Imaging(_) => "imaging",
            Error::Metrics(_) => "metrics",
            Error::Io { .. } => "io",
            Error::Usage(_) => "cli",
        }
    }

    /// Process exit status: 2 for bad configuration or input, 3 for numerical
    /// failure, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(ConfigError::Read { .. }) => EXIT_IO,
            Error::Config(_) | Error::Scene(_) | Error::Waveform(_) | Error::Usage(_) => {
                EXIT_CONFIG
            }
            Error::Io { .. } | Error::Forward(ForwardError::Io(_)) => EXIT_IO,
            Error::Forward(
                ForwardError::Parse { .. } | ForwardError::Length { .. } | ForwardError::InvalidSnr(_),
            ) => EXIT_CONFIG,
            Error::Subspace(SubspaceError::Length { .. } | SubspaceError::InvalidThreshold(_)) => {
                EXIT_CONFIG
            }
            Error::Imaging(
                ImagingError::EmptyRaster { .. }
                | ImagingError::InvalidPixelSize(_)
                | ImagingError::NonFiniteOrigin
                | ImagingError::NoPaths
                | ImagingError::GridMismatch
                | ImagingError::BasisShape { .. },
            ) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        }
    }
}
