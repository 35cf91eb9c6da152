use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the attention pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("MissingFile: {0}")]
    MissingFile(PathBuf),

    #[error("DimensionMismatch: {what} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        what: String,
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },

    #[error("UnknownElementId: element {0} is not in the catalog")]
    UnknownElementId(u16),

    #[error("MalformedCatalog: {0}")]
    MalformedCatalog(String),

    #[error("MalformedDepth: {0}")]
    MalformedDepth(String),

    #[error("MalformedLabels: {0}")]
    MalformedLabels(String),

    #[error("MalformedRulePack: {0}")]
    MalformedRulePack(String),

    #[error("UnknownProfile: {0}")]
    UnknownProfile(String),

    #[error("InvalidScalePair: center {center}, surround {surround} with {levels} levels")]
    InvalidScalePair {
        center: usize,
        surround: usize,
        levels: usize,
    },

    #[error("ImageTooSmall: {width}x{height}, need at least {min} on each side")]
    ImageTooSmall { width: usize, height: usize, min: usize },

    #[error("NoVanishingPoint: polar projection needs a detected vanishing point")]
    NoVanishingPoint,

    #[error("EmptyRelevantRegion: no pixel of this view is relevant to the profile")]
    EmptyRelevantRegion,

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),

    #[error("IoError: {0}")]
    Image(#[from] image::ImageError),

    #[error("IoError: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short variant name, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingFile(_) => "MissingFile",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnknownElementId(_) => "UnknownElementId",
            Error::MalformedCatalog(_) => "MalformedCatalog",
            Error::MalformedDepth(_) => "MalformedDepth",
            Error::MalformedLabels(_) => "MalformedLabels",
            Error::MalformedRulePack(_) => "MalformedRulePack",
            Error::UnknownProfile(_) => "UnknownProfile",
            Error::InvalidScalePair { .. } => "InvalidScalePair",
            Error::ImageTooSmall { .. } => "ImageTooSmall",
            Error::NoVanishingPoint => "NoVanishingPoint",
            Error::EmptyRelevantRegion => "EmptyRelevantRegion",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) | Error::Image(_) | Error::Json(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
