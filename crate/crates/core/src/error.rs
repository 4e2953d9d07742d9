use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch between {left} ({lw}x{lh}) and {right} ({rw}x{rh})")]
    DimensionMismatch {
        left: &'static str,
        right: &'static str,
        lw: usize,
        lh: usize,
        rw: usize,
        rh: usize,
    },

    #[error("image of {width}x{height} is too small: {reason}")]
    TooSmall {
        width: usize,
        height: usize,
        reason: String,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("evaluation region is empty")]
    EmptyRegion,

    #[error("connectivity source region is empty: {0}")]
    NoSourceRegion(String),

    #[error("conjugate gradient did not converge on channel {channel} after {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        channel: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("no unknown trimap pixel to center a crop on")]
    NoUnknownPixel,

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for failures of a numerical procedure rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotConverged { .. } | Error::NoSourceRegion(_))
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Format { .. })
    }
}

pub(crate) fn check_dims(
    left: &'static str,
    (lw, lh): (usize, usize),
    right: &'static str,
    (rw, rh): (usize, usize),
) -> Result<()> {
    if lw == rw && lh == rh {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            left,
            right,
            lw,
            lh,
            rw,
            rh,
        })
    }
}
