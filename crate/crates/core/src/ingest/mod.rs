//! Reading F0 traces and note tables, the cents axis, and octave repair.
//!
//! Everything downstream works in cents relative to a per-piece reference
//! frequency. The F0 trace arrives as `time,frequency` rows from an external
//! pitch tracker; the score arrives as `micromidi,duration` rows where one
//! micromidi unit is 50 cents.

mod cents;
mod micromidi;
mod octave;
mod score;
mod series;

pub use cents::{cents_to_hz, hz_to_cents, OCTAVE_CENTS};
pub use micromidi::{MicroMidi, MICROMIDI_MAX, MICROMIDI_MIN, MICROMIDI_STEP_CENTS};
pub use octave::{
    correct_octave_errors, parse_octave_spans, AutoOctaveConfig, OctavePolicy, OctaveSpan,
};
pub use score::{parse_note_table, write_note_table, NoteEvent, ScoreSequence};
pub use series::{
    parse_f0_csv, write_f0_csv, F0CsvOptions, PitchSample, PitchSeries, DEFAULT_FRAME_HOP,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },
    #[error("config error: {0}")]
    Config(String),
}

impl IngestError {
    pub(crate) fn format(row: usize, message: impl Into<String>) -> Self {
        IngestError::Format {
            row,
            message: message.into(),
        }
    }
}

/// Splits a CSV body into numbered, trimmed, non-empty rows.
///
/// Row numbers are 1-based line numbers so error messages point at the
/// right line in an editor. Handles LF and CRLF.
pub(crate) fn csv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line.split(',').map(str::trim).collect()))
        }
    })
}

/// True when a row looks like a header (first field is not numeric).
pub(crate) fn is_header(fields: &[&str]) -> bool {
    fields
        .first()
        .map(|f| !f.is_empty() && f.parse::<f64>().is_err())
        .unwrap_or(false)
}
