//! Score alignment: DTW between the F0 cents curve and the transcribed
//! notes, per-note histograms, and score-driven peak refinement.

mod dtw;
mod notes;
mod refine;

pub use dtw::{dtw_align, local_cost, AlignConfig, AlignmentPath};
pub use notes::{note_histograms, NoteHistogramSet};
pub use refine::{label_peaks, refine_peaks, RefineConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::histogram::{modal_peak, Peak};
use crate::ingest::{MicroMidi, ScoreSequence};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignError {
    #[error("alignment unavailable: score absent")]
    ScoreAbsent,
    #[error("no voiced frames to align")]
    EmptyInput,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Pins one score note to a position on the piece's cents axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub note: MicroMidi,
    pub cents: f64,
}

impl Anchor {
    pub fn cents_of(&self, note: MicroMidi) -> f64 {
        self.cents + note.cents_from(self.note)
    }
}

/// Expected cents of every score event, 50 cents per micromidi step.
pub fn score_to_cents(score: &ScoreSequence, anchor: Anchor) -> Vec<f64> {
    score.events.iter().map(|e| anchor.cents_of(e.note)).collect()
}

/// The score's longest-held note, pinned to the piece's heaviest peak.
pub fn choose_anchor(score: &ScoreSequence, peaks: &[Peak]) -> Option<Anchor> {
    Some(Anchor {
        note: score.modal_note()?,
        cents: modal_peak(peaks)?.center,
    })
}
