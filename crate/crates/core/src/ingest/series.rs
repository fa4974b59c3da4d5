use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{csv_rows, hz_to_cents, is_header, IngestError};

/// Hop of a 256-sample step at 44.1 kHz, the analysis grid most F0 exports use.
pub const DEFAULT_FRAME_HOP: f64 = 256.0 / 44_100.0;

/// Reference used when nothing better is known yet; callers normally
/// re-reference to the piece's modal peak afterwards.
pub(crate) const PROVISIONAL_REF_HZ: f64 = 440.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchSample {
    pub time: f64,
    /// `None` marks an unvoiced frame.
    pub f0: Option<f64>,
}

impl PitchSample {
    pub fn voiced(time: f64, f0: f64) -> Self {
        PitchSample { time, f0: Some(f0) }
    }

    pub fn unvoiced(time: f64) -> Self {
        PitchSample { time, f0: None }
    }
}

/// A frame-level F0 trace with its cents origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchSeries {
    samples: Vec<PitchSample>,
    frame_hop: f64,
    ref_hz: f64,
}

impl PitchSeries {
    pub fn new(samples: Vec<PitchSample>, frame_hop: f64, ref_hz: f64) -> Result<Self, IngestError> {
        if !(frame_hop > 0.0 && frame_hop.is_finite()) {
            return Err(IngestError::Domain(format!("frame hop must be positive, got {frame_hop}")));
        }
        if !(ref_hz > 0.0 && ref_hz.is_finite()) {
            return Err(IngestError::Domain(format!("reference must be positive, got {ref_hz}")));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.time >= 0.0 && s.time.is_finite()) {
                return Err(IngestError::Domain(format!("sample {i}: invalid time {}", s.time)));
            }
            if i > 0 && s.time <= samples[i - 1].time {
                return Err(IngestError::Domain(format!("sample {i}: time not increasing")));
            }
            if let Some(f) = s.f0 {
                if !(f > 0.0 && f.is_finite()) {
                    return Err(IngestError::Domain(format!("sample {i}: invalid f0 {f}")));
                }
            }
        }
        Ok(PitchSeries {
            samples,
            frame_hop,
            ref_hz,
        })
    }

    pub fn samples(&self) -> &[PitchSample] {
        &self.samples
    }

    pub fn frame_hop(&self) -> f64 {
        self.frame_hop
    }

    pub fn ref_hz(&self) -> f64 {
        self.ref_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Cents of sample `i`, or `None` when unvoiced.
    pub fn cents_at(&self, i: usize) -> Option<f64> {
        self.samples[i]
            .f0
            .map(|f| hz_to_cents(f, self.ref_hz).expect("validated on construction"))
    }

    /// Cents of every sample, unvoiced frames as `None`.
    pub fn cents(&self) -> Vec<Option<f64>> {
        (0..self.samples.len()).map(|i| self.cents_at(i)).collect()
    }

    pub fn voiced_indices(&self) -> Vec<usize> {
        self.samples
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.f0.map(|_| i))
            .collect()
    }

    pub fn voiced_cents(&self) -> Vec<f64> {
        self.cents().into_iter().flatten().collect()
    }

    pub fn voiced_count(&self) -> usize {
        self.samples.iter().filter(|s| s.f0.is_some()).count()
    }

    pub fn duration(&self) -> f64 {
        self.samples
            .last()
            .map(|s| s.time + self.frame_hop)
            .unwrap_or(0.0)
    }

    /// Same trace with a different cents origin.
    pub fn with_ref_hz(&self, ref_hz: f64) -> Result<Self, IngestError> {
        PitchSeries::new(self.samples.clone(), self.frame_hop, ref_hz)
    }

    /// Same timestamps, replaced frequencies.
    pub(crate) fn with_f0(&self, f0: Vec<Option<f64>>) -> Self {
        debug_assert_eq!(f0.len(), self.samples.len());
        let samples = self
            .samples
            .iter()
            .zip(f0)
            .map(|(s, f0)| PitchSample { time: s.time, f0 })
            .collect();
        PitchSeries {
            samples,
            frame_hop: self.frame_hop,
            ref_hz: self.ref_hz,
        }
    }

    /// Checks that voiced frames sit on the `frame_hop` grid within 1e-6 s.
    pub fn is_on_grid(&self) -> bool {
        let voiced: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.f0.is_some())
            .map(|s| s.time)
            .collect();
        voiced.windows(2).all(|w| {
            let steps = (w[1] - w[0]) / self.frame_hop;
            (steps - steps.round()).abs() * self.frame_hop < 1e-6
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct F0CsvOptions {
    /// Cents origin. Defaults to a provisional 440 Hz.
    pub ref_hz: Option<f64>,
    /// Frame hop. Defaults to the median spacing of the rows.
    pub frame_hop: Option<f64>,
}

/// Parses `time,frequency` rows. A frequency that is empty, NaN, or `<= 0`
/// marks the frame unvoiced. A non-numeric first row is taken as a header.
pub fn parse_f0_csv(text: &str, opts: &F0CsvOptions) -> Result<PitchSeries, IngestError> {
    let mut samples: Vec<PitchSample> = Vec::new();
    for (idx, (row, fields)) in csv_rows(text).enumerate() {
        if idx == 0 && is_header(&fields) {
            continue;
        }
        if fields.len() < 2 {
            return Err(IngestError::format(row, "expected `time,frequency`"));
        }
        let time: f64 = fields[0]
            .parse()
            .map_err(|_| IngestError::format(row, format!("bad time '{}'", fields[0])))?;
        if !(time >= 0.0 && time.is_finite()) {
            return Err(IngestError::format(row, format!("bad time '{}'", fields[0])));
        }
        let f0 = if fields[1].is_empty() {
            None
        } else {
            let f: f64 = fields[1]
                .parse()
                .map_err(|_| IngestError::format(row, format!("bad frequency '{}'", fields[1])))?;
            if f.is_nan() || f <= 0.0 {
                None
            } else if f.is_infinite() {
                return Err(IngestError::format(row, "infinite frequency"));
            } else {
                Some(f)
            }
        };
        if let Some(prev) = samples.last() {
            if time <= prev.time {
                return Err(IngestError::format(row, "time is not strictly increasing"));
            }
        }
        samples.push(PitchSample { time, f0 });
    }
    let frame_hop = match opts.frame_hop {
        Some(h) => h,
        None => median_spacing(&samples).unwrap_or(DEFAULT_FRAME_HOP),
    };
    PitchSeries::new(samples, frame_hop, opts.ref_hz.unwrap_or(PROVISIONAL_REF_HZ))
}

fn median_spacing(samples: &[PitchSample]) -> Option<f64> {
    let mut gaps: Vec<f64> = samples.windows(2).map(|w| w[1].time - w[0].time).collect();
    if gaps.is_empty() {
        return None;
    }
    gaps.sort_by(f64::total_cmp);
    Some(gaps[gaps.len() / 2])
}

/// Writes `time,frequency` rows with unvoiced frames as `0`.
///
/// Values use the shortest representation that parses back to the same
/// `f64`, so a parse/write cycle is lossless.
pub fn write_f0_csv(series: &PitchSeries) -> String {
    let mut out = String::with_capacity(series.len() * 24);
    for s in series.samples() {
        match s.f0 {
            Some(f) => writeln!(out, "{},{}", s.time, f),
            None => writeln!(out, "{},0", s.time),
        }
        .expect("writing to a String");
    }
    out
}
