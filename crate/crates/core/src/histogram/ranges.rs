use serde::{Deserialize, Serialize};

use super::{Histogram, HistogramError};

/// Extent of one histogram mountain on the cents axis, on bin edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakRange {
    pub lo: f64,
    pub hi: f64,
}

impl PeakRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, HistogramError> {
        if lo < hi {
            Ok(PeakRange { lo, hi })
        } else {
            Err(HistogramError::InvalidParameter(format!("empty range [{lo}, {hi})")))
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, cents: f64) -> bool {
        self.lo <= cents && cents < self.hi
    }

    /// Closed-interval test, used for centre invariants.
    pub fn covers(&self, cents: f64) -> bool {
        self.lo <= cents && cents <= self.hi
    }
}

/// Indices of local maxima of `counts`, treating everything outside the
/// slice as zero. A flat top reports its middle bin.
pub fn local_maxima(counts: &[f64]) -> Vec<usize> {
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= counts.len() {
            0.0
        } else {
            counts[i as usize]
        }
    };
    let mut maxima = Vec::new();
    let mut i = 0;
    while i < counts.len() {
        if counts[i] <= 0.0 {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < counts.len() && counts[j + 1] == counts[i] {
            j += 1;
        }
        if at(i as isize - 1) < counts[i] && at(j as isize + 1) < counts[i] {
            maxima.push((i + j) / 2);
        }
        i = j + 1;
    }
    maxima
}

/// Splits a (smoothed) histogram into mountains.
///
/// Apexes are the `+ -> -` sign changes of the first difference and valleys
/// the lowest bin between neighbouring apexes; empty bins always end a
/// mountain. Apexes whose prominence above the higher adjacent valley is
/// below `min_prominence_fraction * max_count` are dropped one at a time,
/// lowest first, and their slopes join the neighbour across the lower
/// valley. Each returned range holds exactly one surviving apex, and ranges
/// never overlap: a valley bin belongs to the range on its right.
pub fn find_peak_ranges(
    h: &Histogram,
    min_prominence_fraction: f64,
) -> Result<Vec<PeakRange>, HistogramError> {
    Ok(range_bins(h, min_prominence_fraction)?
        .into_iter()
        .map(|(a, b, _)| PeakRange {
            lo: h.bin_edge(a),
            hi: h.bin_edge(b),
        })
        .collect())
}

/// Like [`find_peak_ranges`] but in bin indices: `(start, end, apex)` with
/// `end` exclusive.
pub(crate) fn range_bins(
    h: &Histogram,
    min_prominence_fraction: f64,
) -> Result<Vec<(usize, usize, usize)>, HistogramError> {
    if !(0.0..1.0).contains(&min_prominence_fraction) {
        return Err(HistogramError::InvalidParameter(format!(
            "prominence fraction must lie in [0, 1), got {min_prominence_fraction}"
        )));
    }
    let c = &h.counts;
    let threshold = min_prominence_fraction * h.max_count();
    let mut out = Vec::new();
    for (start, end) in islands(c) {
        let mut apexes: Vec<usize> = local_maxima(&c[start..end]).into_iter().map(|i| i + start).collect();
        let mut valleys: Vec<usize> = apexes
            .windows(2)
            .map(|w| argmin(c, w[0] + 1, w[1]))
            .collect();

        loop {
            let prominence = |i: usize| -> f64 {
                let left = if i > 0 { c[valleys[i - 1]] } else { 0.0 };
                let right = if i < valleys.len() { c[valleys[i]] } else { 0.0 };
                c[apexes[i]] - left.max(right)
            };
            let weakest = (0..apexes.len())
                .map(|i| (i, prominence(i)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((i, p)) = weakest else { break };
            if p >= threshold {
                break;
            }
            apexes.remove(i);
            match (i > 0, i < valleys.len()) {
                (true, true) => {
                    // keep the deeper of the two valleys
                    if c[valleys[i - 1]] <= c[valleys[i]] {
                        valleys.remove(i);
                    } else {
                        valleys.remove(i - 1);
                    }
                }
                (true, false) => {
                    valleys.remove(i - 1);
                }
                (false, true) => {
                    valleys.remove(i);
                }
                (false, false) => {}
            }
        }

        for (k, &apex) in apexes.iter().enumerate() {
            let a = if k == 0 { start } else { valleys[k - 1] };
            let b = if k < valleys.len() { valleys[k] } else { end };
            out.push((a, b, apex));
        }
    }
    Ok(out)
}

/// Maximal runs of non-zero bins.
fn islands(c: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &v) in c.iter().enumerate() {
        match (v > 0.0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, c.len()));
    }
    out
}

fn argmin(c: &[f64], from: usize, to: usize) -> usize {
    (from..to)
        .min_by(|&a, &b| c[a].total_cmp(&c[b]))
        .unwrap_or(from)
}
