//! Text artifacts written by the command-line tools.

use std::fmt::Write as _;

use serde::Serialize;

use crate::align::AlignmentPath;
use crate::histogram::{Peak, PeakType};
use crate::ingest::{PitchSeries, ScoreSequence};

#[derive(Debug, Serialize)]
struct FitRecord {
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
    c5: f64,
    rmse: f64,
    converged: bool,
    candidates: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct PeakRecord {
    center_cents: f64,
    lo: f64,
    hi: f64,
    mass_fraction: f64,
    #[serde(rename = "type")]
    peak_type: PeakType,
    fit: Option<FitRecord>,
    label: Option<String>,
    unresolved: bool,
}

/// JSON array of peaks. Alternatives for double-apex peaks travel inside
/// the fit payload as `candidates`.
pub fn peaks_json(peaks: &[Peak]) -> String {
    let records: Vec<PeakRecord> = peaks
        .iter()
        .map(|p| PeakRecord {
            center_cents: p.center,
            lo: p.range.lo,
            hi: p.range.hi,
            mass_fraction: p.mass_fraction,
            peak_type: p.peak_type,
            fit: p.fit.as_ref().map(|f| FitRecord {
                c1: f.c1,
                c2: f.c2,
                c3: f.c3,
                c4: f.c4,
                c5: f.c5,
                rmse: f.rmse,
                converged: f.converged,
                candidates: p.candidates.clone(),
            }),
            label: p.note.map(|n| n.name()),
            unresolved: p.unresolved,
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("peaks serialise") + "\n"
}

/// `time_seconds,frame_cents,event_index,micromidi` for every sample;
/// unvoiced samples leave `frame_cents` empty.
pub fn alignment_csv(series: &PitchSeries, path: &AlignmentPath, score: &ScoreSequence) -> String {
    let mut out = String::from("time_seconds,frame_cents,event_index,micromidi\n");
    for (k, (sample, e)) in series.samples().iter().zip(path.sample_events()).enumerate() {
        let cents = series.cents_at(k).map(|c| format!("{c:.4}")).unwrap_or_default();
        writeln!(out, "{:.6},{cents},{e},{}", sample.time, score.events[e].note.value())
            .expect("writing to a String");
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serialises") + "\n"
}
