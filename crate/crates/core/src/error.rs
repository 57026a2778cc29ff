use thiserror::Error;

use crate::leg::Frame;

/// Errors raised by the kinematics and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An inverse-trig argument left [-1, 1] by more than the clamp tolerance.
    #[error("point unreachable: {bound} argument {value} outside [-1, 1]")]
    Unreachable { bound: &'static str, value: f64 },

    #[error("foot lies on the root joint axis, azimuth undefined")]
    SingularAzimuth,

    #[error("expected a point in the {expected:?} frame, got {found:?}")]
    FrameMismatch { expected: Frame, found: Frame },

    #[error("leg {leg}: {source}")]
    Leg { leg: usize, source: Box<Error> },

    #[error("degenerate foot set, rank {rank} < 2")]
    Rank { rank: usize },

    #[error("inconsistent stance data, registration residual {rms} mm")]
    Consistency { rms: f64 },

    #[error("raster too coarse: region covers {cells} cells (need at least 4)")]
    Resolution { cells: usize },

    #[error("invalid configuration: {0}")]
    Configuration(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn on_leg(self, leg: usize) -> Self {
        Error::Leg {
            leg,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
