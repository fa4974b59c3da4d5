use serde::{Deserialize, Serialize};

use super::AlignError;
use crate::ingest::PitchSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignConfig {
    /// Restrict the lattice to a band around the duration-implied diagonal.
    pub use_band: bool,
    /// Band half-width as a fraction of the voiced frame count...
    pub band_fraction: f64,
    /// ...or this many seconds of frames, whichever is larger.
    pub band_seconds: f64,
    /// Per-frame local cost ceiling in cents.
    pub cost_cap: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            use_band: true,
            band_fraction: 0.1,
            band_seconds: 2.0,
            cost_cap: 600.0,
        }
    }
}

impl AlignConfig {
    pub fn validate(&self) -> Result<(), AlignError> {
        if !(0.0..=1.0).contains(&self.band_fraction) || !(self.band_seconds >= 0.0) || !(self.cost_cap > 0.0) {
            return Err(AlignError::InvalidInput("align keys out of range".into()));
        }
        Ok(())
    }
}

/// Monotone frame-to-event path over the voiced frames of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentPath {
    /// `(voiced_frame, event)` pairs from `(0, 0)` to `(last, last)`.
    pub pairs: Vec<(usize, usize)>,
    /// Sum of local costs along the path.
    pub cost: f64,
    /// Sample index of each voiced frame.
    pub voiced_indices: Vec<usize>,
    /// One event per voiced frame: among the pairs touching the frame, the
    /// one with the lowest local cost.
    pub frame_event: Vec<usize>,
    pub sample_count: usize,
    pub event_count: usize,
}

impl AlignmentPath {
    /// Event for every sample of the series; unvoiced samples take the event
    /// of the nearest voiced sample (the earlier one on ties).
    pub fn sample_events(&self) -> Vec<usize> {
        let mut out = vec![0; self.sample_count];
        let v = &self.voiced_indices;
        let mut k = 0;
        for (s, slot) in out.iter_mut().enumerate() {
            while k + 1 < v.len() && v[k + 1] <= s {
                k += 1;
            }
            // v[k] is the last voiced index <= s, or the first voiced one
            let best = if v[k] < s && k + 1 < v.len() && v[k + 1] - s < s - v[k] { k + 1 } else { k };
            *slot = self.frame_event[best];
        }
        out
    }

    /// Boundary, monotonicity, unit steps, and frame coverage.
    pub fn is_valid(&self) -> bool {
        let n = self.voiced_indices.len();
        let (Some(first), Some(last)) = (self.pairs.first(), self.pairs.last()) else {
            return false;
        };
        if *first != (0, 0) || *last != (n - 1, self.event_count - 1) {
            return false;
        }
        let steps_ok = self.pairs.windows(2).all(|w| {
            let di = w[1].0 as isize - w[0].0 as isize;
            let dj = w[1].1 as isize - w[0].1 as isize;
            matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
        });
        let mut seen = vec![false; n];
        self.pairs.iter().for_each(|&(i, _)| seen[i] = true);
        steps_ok && seen.into_iter().all(|s| s) && self.frame_event.len() == n
    }
}

pub fn local_cost(frame: f64, event: f64, cap: f64) -> f64 {
    (frame - event).abs().min(cap)
}

/// DTW between voiced frames and score events.
///
/// Local cost is the absolute cents difference capped at `cost_cap`; steps
/// are (1,0), (0,1), (1,1). When enabled, a band keeps frame `i` within
/// `half` frames of the stretch the durations assign to each event; if the
/// band leaves no path the full lattice is used instead.
pub fn dtw_align(
    series: &PitchSeries,
    expected: &[f64],
    durations: &[f64],
    cfg: &AlignConfig,
) -> Result<AlignmentPath, AlignError> {
    cfg.validate()?;
    if expected.is_empty() {
        return Err(AlignError::ScoreAbsent);
    }
    if durations.len() != expected.len() {
        return Err(AlignError::InvalidInput(format!(
            "{} expected pitches but {} durations",
            expected.len(),
            durations.len()
        )));
    }
    let voiced_indices = series.voiced_indices();
    if voiced_indices.is_empty() {
        return Err(AlignError::EmptyInput);
    }
    let frames: Vec<f64> = series.voiced_cents();

    let windows = if cfg.use_band {
        let half = (cfg.band_fraction * frames.len() as f64).max(cfg.band_seconds / series.frame_hop());
        Some(band_windows(frames.len(), durations, half)?)
    } else {
        None
    };
    let (pairs, cost) = match solve(&frames, expected, cfg.cost_cap, windows.as_deref()) {
        Some(found) => found,
        None => solve(&frames, expected, cfg.cost_cap, None).expect("full lattice always has a path"),
    };

    let mut frame_event = vec![usize::MAX; frames.len()];
    let mut best = vec![f64::INFINITY; frames.len()];
    for &(i, j) in &pairs {
        let c = local_cost(frames[i], expected[j], cfg.cost_cap);
        if c < best[i] {
            best[i] = c;
            frame_event[i] = j;
        }
    }
    Ok(AlignmentPath {
        pairs,
        cost,
        voiced_indices,
        frame_event,
        sample_count: series.len(),
        event_count: expected.len(),
    })
}

/// Allowed frame interval `[lo, hi]` for each event.
fn band_windows(n: usize, durations: &[f64], half: f64) -> Result<Vec<(usize, usize)>, AlignError> {
    if durations.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(AlignError::InvalidInput("durations must be positive".into()));
    }
    let total: f64 = durations.iter().sum();
    let mut acc = 0.0;
    let last = (n - 1) as f64;
    Ok(durations
        .iter()
        .map(|d| {
            let a = n as f64 * acc / total;
            acc += d;
            let b = n as f64 * acc / total;
            let lo = (a - half).floor().clamp(0.0, last) as usize;
            let hi = (b + half).ceil().clamp(0.0, last) as usize;
            (lo, hi)
        })
        .collect())
}

fn solve(
    frames: &[f64],
    expected: &[f64],
    cap: f64,
    windows: Option<&[(usize, usize)]>,
) -> Option<(Vec<(usize, usize)>, f64)> {
    let (n, m) = (frames.len(), expected.len());
    let inside = |i: usize, j: usize| windows.is_none_or(|w| w[j].0 <= i && i <= w[j].1);
    let mut acc = vec![f64::INFINITY; n * m];
    let at = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        for j in 0..m {
            if !inside(i, j) {
                continue;
            }
            let local = local_cost(frames[i], expected[j], cap);
            let prev = if i == 0 && j == 0 {
                0.0
            } else {
                let mut p = f64::INFINITY;
                if i > 0 && j > 0 {
                    p = p.min(acc[at(i - 1, j - 1)]);
                }
                if i > 0 {
                    p = p.min(acc[at(i - 1, j)]);
                }
                if j > 0 {
                    p = p.min(acc[at(i, j - 1)]);
                }
                p
            };
            acc[at(i, j)] = local + prev;
        }
    }
    let cost = acc[at(n - 1, m - 1)];
    if !cost.is_finite() {
        return None;
    }

    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        let mut options: Vec<(usize, usize)> = Vec::with_capacity(3);
        if i > 0 && j > 0 {
            options.push((i - 1, j - 1));
        }
        if i > 0 {
            options.push((i - 1, j));
        }
        if j > 0 {
            options.push((i, j - 1));
        }
        // first minimum wins, so the diagonal is preferred on ties
        let next = options
            .into_iter()
            .fold(None, |best: Option<(usize, usize)>, c| match best {
                Some(b) if acc[at(b.0, b.1)] <= acc[at(c.0, c.1)] => Some(b),
                _ => Some(c),
            })
            .expect("at least one predecessor");
        (i, j) = next;
        path.push(next);
    }
    path.reverse();
    Some((path, cost))
}
