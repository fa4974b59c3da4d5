use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{csv_rows, is_header, IngestError, MicroMidi};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub note: MicroMidi,
    pub duration: f64,
}

impl NoteEvent {
    pub fn new(note: MicroMidi, duration: f64) -> Result<Self, IngestError> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(IngestError::Domain(format!("note duration must be positive, got {duration}")));
        }
        Ok(NoteEvent { note, duration })
    }
}

/// Transcribed note sequence of one piece. An empty sequence means the
/// piece has no score.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSequence {
    pub events: Vec<NoteEvent>,
}

impl ScoreSequence {
    pub fn new(events: Vec<NoteEvent>) -> Self {
        ScoreSequence { events }
    }

    pub fn is_absent(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.events.iter().map(|e| e.duration).sum()
    }

    pub fn durations(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.duration).collect()
    }

    /// Note holding the largest total duration; ties go to the lower note.
    pub fn modal_note(&self) -> Option<MicroMidi> {
        let mut totals: BTreeMap<MicroMidi, f64> = BTreeMap::new();
        for e in &self.events {
            *totals.entry(e.note).or_default() += e.duration;
        }
        totals
            .into_iter()
            .fold(None, |best: Option<(MicroMidi, f64)>, (n, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((n, d)),
            })
            .map(|(n, _)| n)
    }

    /// Distinct notes in ascending order.
    pub fn distinct_notes(&self) -> Vec<MicroMidi> {
        let mut notes: Vec<MicroMidi> = self.events.iter().map(|e| e.note).collect();
        notes.sort();
        notes.dedup();
        notes
    }
}

/// Parses `micromidi,duration_seconds` rows; a header row is skipped.
pub fn parse_note_table(text: &str) -> Result<ScoreSequence, IngestError> {
    let mut events = Vec::new();
    for (idx, (row, fields)) in csv_rows(text).enumerate() {
        if idx == 0 && is_header(&fields) {
            continue;
        }
        if fields.len() < 2 {
            return Err(IngestError::format(row, "expected `micromidi,duration`"));
        }
        let value: u16 = fields[0]
            .parse()
            .map_err(|_| IngestError::format(row, format!("note '{}' is not an integer", fields[0])))?;
        let note = MicroMidi::new(value).map_err(|e| IngestError::format(row, e.to_string()))?;
        let duration: f64 = fields[1]
            .parse()
            .map_err(|_| IngestError::format(row, format!("bad duration '{}'", fields[1])))?;
        let event = NoteEvent::new(note, duration).map_err(|e| IngestError::format(row, e.to_string()))?;
        events.push(event);
    }
    Ok(ScoreSequence { events })
}

pub fn write_note_table(score: &ScoreSequence) -> String {
    let mut out = String::new();
    for e in &score.events {
        writeln!(out, "{},{}", e.note.value(), e.duration).expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g2_half_second() {
        let s = parse_note_table("110,0.5").unwrap();
        assert_eq!(s.events, vec![NoteEvent { note: MicroMidi::new(110).unwrap(), duration: 0.5 }]);
        assert_eq!(s.events[0].note.name(), "G2");
    }

    #[test]
    fn a2_koron() {
        let s = parse_note_table("note,dur\n113,0.25\n").unwrap();
        assert_eq!(s.events[0].note.name(), "A2-koron");
        assert_eq!(s.events[0].duration, 0.25);
    }

    #[test]
    fn empty_is_absent() {
        let s = parse_note_table("").unwrap();
        assert!(s.is_absent());
        assert!(parse_note_table("micromidi,duration\n").unwrap().is_absent());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(parse_note_table("110.5,0.5"), Err(IngestError::Format { row: 1, .. })));
        assert!(matches!(parse_note_table("110,0.5\n112,0"), Err(IngestError::Format { row: 2, .. })));
        assert!(parse_note_table("110,-1").is_err());
        assert!(parse_note_table("300,1").is_err());
    }

    #[test]
    fn modal_note_by_duration() {
        let s = parse_note_table("110,0.5\n114,0.3\n114,0.3\n110,0.05").unwrap();
        assert_eq!(s.modal_note().unwrap().value(), 114);
        assert_eq!(s.distinct_notes().len(), 2);
        assert_eq!(parse_note_table(&write_note_table(&s)).unwrap(), s);
    }
}
