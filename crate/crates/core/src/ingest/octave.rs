use serde::{Deserialize, Serialize};

use super::{csv_rows, hz_to_cents, is_header, IngestError, PitchSeries, OCTAVE_CENTS};

/// A user-supplied correction: voiced frames with `start <= t < end` are
/// moved by `octave_shift` octaves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OctaveSpan {
    pub start: f64,
    pub end: f64,
    pub octave_shift: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutoOctaveConfig {
    /// Tolerance around an exact octave multiple, in cents.
    pub window_cents: f64,
    /// Shortest run that may be shifted.
    pub min_run_frames: usize,
}

impl Default for AutoOctaveConfig {
    fn default() -> Self {
        AutoOctaveConfig {
            window_cents: 80.0,
            min_run_frames: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OctavePolicy {
    Automatic(AutoOctaveConfig),
    Manual(Vec<OctaveSpan>),
}

/// Repairs octave jumps. Timestamps and voicing are never changed.
///
/// The automatic policy splits the voiced frames into runs (broken by
/// unvoiced frames or by a jump of at least one octave minus the window)
/// and shifts any run sitting a whole number of octaves (1 or 2) away from
/// *both* neighbouring runs. It repeats until nothing moves, so applying it
/// twice gives the same result as once.
pub fn correct_octave_errors(
    series: &PitchSeries,
    policy: &OctavePolicy,
) -> Result<PitchSeries, IngestError> {
    match policy {
        OctavePolicy::Manual(spans) => apply_spans(series, spans),
        OctavePolicy::Automatic(cfg) => {
            if !(cfg.window_cents > 0.0 && cfg.window_cents < OCTAVE_CENTS / 2.0) {
                return Err(IngestError::Config(format!(
                    "octave window must be in (0, 600) cents, got {}",
                    cfg.window_cents
                )));
            }
            let mut f0: Vec<Option<f64>> = series.samples().iter().map(|s| s.f0).collect();
            // bounded so that pathological alternating patterns cannot loop forever
            for _ in 0..f0.len().max(1) {
                if !auto_pass(&mut f0, series.ref_hz(), cfg) {
                    break;
                }
            }
            Ok(series.with_f0(f0))
        }
    }
}

fn auto_pass(f0: &mut [Option<f64>], ref_hz: f64, cfg: &AutoOctaveConfig) -> bool {
    let cents: Vec<Option<f64>> = f0
        .iter()
        .map(|f| f.map(|f| hz_to_cents(f, ref_hz).expect("validated series")))
        .collect();
    let runs = voiced_runs(&cents, OCTAVE_CENTS - cfg.window_cents);
    let medians: Vec<f64> = runs
        .iter()
        .map(|&(a, b)| median(cents[a..b].iter().flatten().copied().collect()))
        .collect();

    let mut shifts = Vec::new();
    for r in 1..runs.len().saturating_sub(1) {
        let (a, b) = runs[r];
        if b - a < cfg.min_run_frames {
            continue;
        }
        let to_prev = medians[r] - medians[r - 1];
        let to_next = medians[r] - medians[r + 1];
        for k in [-2i32, -1, 1, 2] {
            let target = f64::from(k) * OCTAVE_CENTS;
            if (to_prev - target).abs() <= cfg.window_cents && (to_next - target).abs() <= cfg.window_cents {
                shifts.push((a, b, -k));
                break;
            }
        }
    }
    for &(a, b, k) in &shifts {
        let factor = f64::from(k).exp2();
        for f in f0[a..b].iter_mut().flatten() {
            *f *= factor;
        }
    }
    !shifts.is_empty()
}

/// Half-open index ranges of voiced runs.
fn voiced_runs(cents: &[Option<f64>], jump: f64) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..cents.len() {
        match (cents[i], start) {
            (None, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            (Some(c), Some(s)) => {
                let prev = cents[i - 1].expect("inside a run");
                if (c - prev).abs() >= jump {
                    runs.push((s, i));
                    start = Some(i);
                }
            }
            (Some(_), None) => start = Some(i),
            (None, None) => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, cents.len()));
    }
    runs
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn apply_spans(series: &PitchSeries, spans: &[OctaveSpan]) -> Result<PitchSeries, IngestError> {
    let mut sorted = spans.to_vec();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    for s in &sorted {
        if !(s.start < s.end) {
            return Err(IngestError::Config(format!(
                "correction span [{}, {}) is empty",
                s.start, s.end
            )));
        }
    }
    for w in sorted.windows(2) {
        if w[1].start < w[0].end {
            return Err(IngestError::Config(format!(
                "correction spans [{}, {}) and [{}, {}) overlap",
                w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
    }
    let f0 = series
        .samples()
        .iter()
        .map(|s| {
            s.f0.map(|f| {
                sorted
                    .iter()
                    .find(|sp| sp.start <= s.time && s.time < sp.end)
                    .map_or(f, |sp| f * f64::from(sp.octave_shift).exp2())
            })
        })
        .collect();
    Ok(series.with_f0(f0))
}

/// Parses `start_seconds,end_seconds,octave_shift` rows.
pub fn parse_octave_spans(text: &str) -> Result<Vec<OctaveSpan>, IngestError> {
    let mut spans = Vec::new();
    for (idx, (row, fields)) in csv_rows(text).enumerate() {
        if idx == 0 && is_header(&fields) {
            continue;
        }
        if fields.len() < 3 {
            return Err(IngestError::format(row, "expected `start,end,octave_shift`"));
        }
        let num = |i: usize| -> Result<f64, IngestError> {
            fields[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| IngestError::format(row, format!("bad number '{}'", fields[i])))
        };
        let octave_shift: i32 = fields[2]
            .parse()
            .map_err(|_| IngestError::format(row, format!("octave shift '{}' is not an integer", fields[2])))?;
        spans.push(OctaveSpan {
            start: num(0)?,
            end: num(1)?,
            octave_shift,
        });
    }
    Ok(spans)
}
