//! Tuning estimation for microtonal vocal repertoires.
//!
//! The crate turns frame-level F0 traces into cents, models the peaks of
//! each piece's pitch histogram with a tilted Gaussian, optionally aligns the
//! trace to a transcription with DTW to disambiguate unclear peaks, and then
//! aligns all pieces against each other to read off a repertoire tuning.
//!
//! ```text
//! F0 csv ─ ingest ─ histogram ─┬──────────────── tuning
//!                              └─ align (score) ─┘
//! ```
//!
//! [`synthkit`] generates repertoires with known ground truth; the runnable
//! programs under `examples/` walk through each stage.

// `!(a < b)` is how NaN gets rejected alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod align;
pub mod cli;
pub mod config;
pub mod export;
pub mod histogram;
pub mod ingest;
pub mod pipeline;
pub mod svg;
pub mod synthkit;
pub mod tuning;

use thiserror::Error;

/// Any error raised by the analysis stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ingest: {0}")]
    Ingest(#[from] ingest::IngestError),
    #[error("histogram: {0}")]
    Histogram(#[from] histogram::HistogramError),
    #[error("align: {0}")]
    Align(#[from] align::AlignError),
    #[error("tuning: {0}")]
    Tuning(#[from] tuning::TuningError),
    #[error("synth: {0}")]
    Synth(#[from] synthkit::SynthError),
    #[error("{0}")]
    Config(#[from] config::ConfigError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for problems with the configuration or the input files, 1 for
    /// anything else.
    pub fn exit_code(&self) -> u8 {
        use histogram::HistogramError as H;
        match self {
            Error::Config(_) | Error::Io { .. } | Error::Ingest(_) => 2,
            Error::Histogram(H::EmptyInput | H::InsufficientData(_)) => 2,
            Error::Align(align::AlignError::InvalidInput(_) | align::AlignError::EmptyInput) => 2,
            Error::Tuning(tuning::TuningError::NoPieces) => 2,
            Error::Synth(synthkit::SynthError::Config(_) | synthkit::SynthError::Io { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
