use std::collections::BTreeMap;

use super::{AlignError, AlignmentPath};
use crate::histogram::{Histogram, HistogramError};
use crate::ingest::{MicroMidi, PitchSeries, ScoreSequence};

/// One histogram per score note, over the frames aligned to that note.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoteHistogramSet {
    pub per_note: BTreeMap<MicroMidi, Histogram>,
}

impl NoteHistogramSet {
    pub fn total_mass(&self) -> f64 {
        self.per_note.values().map(|h| h.total_mass).sum()
    }
}

/// Splits the voiced frames by aligned note. Every voiced frame lands in
/// exactly one histogram; notes that received no frames get an empty one.
pub fn note_histograms(
    series: &PitchSeries,
    path: &AlignmentPath,
    score: &ScoreSequence,
    bin_width: f64,
) -> Result<NoteHistogramSet, AlignError> {
    if path.voiced_indices.len() != series.voiced_count() || path.event_count != score.len() {
        return Err(AlignError::InvalidInput("alignment does not belong to this series and score".into()));
    }
    let cents = series.voiced_cents();
    let mut grouped: BTreeMap<MicroMidi, Vec<f64>> =
        score.distinct_notes().into_iter().map(|n| (n, Vec::new())).collect();
    for (frame, &event) in path.frame_event.iter().enumerate() {
        let note = score.events[event].note;
        grouped.get_mut(&note).expect("note from score").push(cents[frame]);
    }
    let per_note = grouped
        .into_iter()
        .map(|(n, values)| Ok((n, Histogram::from_values(&values, bin_width)?)))
        .collect::<Result<_, HistogramError>>()
        .map_err(|e| AlignError::InvalidInput(e.to_string()))?;
    Ok(NoteHistogramSet { per_note })
}
