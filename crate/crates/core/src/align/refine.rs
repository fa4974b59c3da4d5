use serde::{Deserialize, Serialize};

use super::{Anchor, NoteHistogramSet};
use crate::histogram::{parabolic_apex, smooth, Histogram, Peak, PeakRange, PeakType};
use crate::ingest::MicroMidi;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefineConfig {
    /// Share of the range mass one note needs to own the peak.
    pub dominance: f64,
    /// Share each of two notes needs for the peak to be split.
    pub split_share: f64,
    /// Smoothing applied to note histograms before locating their apex.
    pub sigma: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            dominance: 0.8,
            split_share: 0.2,
            sigma: 6.0,
        }
    }
}

/// Uses per-note histograms to settle peaks that the histogram alone left
/// ambiguous (anything but type I).
///
/// Only notes whose expected position falls inside a peak's range are
/// consulted. One note holding at least `dominance` of their combined mass
/// in the range takes over the peak: the centre moves to that note's apex,
/// or to its mass-weighted mean for flat-topped (IV) peaks. Two notes each
/// holding `split_share` or more split the peak in two at the midpoint of
/// their apexes. Otherwise, or when no note covers the range, the peak is
/// returned as is and marked unresolved. Centres never leave the original
/// range.
pub fn refine_peaks(
    peaks: &[Peak],
    nhs: &NoteHistogramSet,
    anchor: Anchor,
    cfg: &RefineConfig,
) -> Vec<Peak> {
    let mut out = Vec::with_capacity(peaks.len());
    for peak in peaks {
        if peak.peak_type == PeakType::I {
            out.push(peak.clone());
            continue;
        }
        let mut shares: Vec<(MicroMidi, &Histogram, f64)> = nhs
            .per_note
            .iter()
            .filter(|(n, _)| peak.range.contains(anchor.cents_of(**n)))
            .map(|(n, h)| (*n, h, h.mass_between(peak.range.lo, peak.range.hi)))
            .filter(|(_, _, m)| *m > 0.0)
            .collect();
        let total: f64 = shares.iter().map(|s| s.2).sum();
        if total <= 0.0 {
            out.push(Peak { unresolved: true, ..peak.clone() });
            continue;
        }
        // heaviest first, ties by note order
        shares.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));

        let (top_note, top_hist, top_mass) = shares[0];
        if top_mass / total >= cfg.dominance {
            let center = if peak.peak_type == PeakType::IV {
                weighted_mean(top_hist, &peak.range)
            } else {
                apex_in(top_hist, &peak.range, cfg.sigma)
            };
            out.push(Peak {
                center: center.map_or(peak.center, |c| clamp_to(c, &peak.range)),
                note: Some(top_note),
                unresolved: false,
                ..peak.clone()
            });
            continue;
        }
        if shares.len() >= 2 && shares[1].2 / total >= cfg.split_share {
            let (a, b) = (shares[0], shares[1]);
            if let (Some(ca), Some(cb)) = (apex_in(a.1, &peak.range, cfg.sigma), apex_in(b.1, &peak.range, cfg.sigma)) {
                let mut parts = [(ca, a.0, a.2), (cb, b.0, b.2)];
                parts.sort_by(|x, y| x.0.total_cmp(&y.0));
                if parts[0].0 < parts[1].0 {
                    let cut = split_edge(parts[0].0, parts[1].0, a.1.bin_width, a.1.origin);
                    let pair_mass = parts[0].2 + parts[1].2;
                    let ranges = [
                        PeakRange { lo: peak.range.lo, hi: cut },
                        PeakRange { lo: cut, hi: peak.range.hi },
                    ];
                    for ((center, note, mass), range) in parts.into_iter().zip(ranges) {
                        let share = mass / pair_mass;
                        out.push(Peak {
                            center: clamp_to(center, &range),
                            range,
                            mass: peak.mass * share,
                            mass_fraction: peak.mass_fraction * share,
                            fit: None,
                            candidates: Vec::new(),
                            note: Some(note),
                            unresolved: false,
                            ..peak.clone()
                        });
                    }
                    continue;
                }
            }
        }
        out.push(Peak { unresolved: true, ..peak.clone() });
    }
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    out
}

/// Attaches the nearest expected score note (within `max_distance` cents) to
/// peaks that have none yet.
pub fn label_peaks(peaks: &mut [Peak], notes: &[MicroMidi], anchor: Anchor, max_distance: f64) {
    for p in peaks.iter_mut().filter(|p| p.note.is_none()) {
        p.note = notes
            .iter()
            .map(|&n| (n, (anchor.cents_of(n) - p.center).abs()))
            .filter(|(_, d)| *d <= max_distance)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(n, _)| n);
    }
}

fn apex_in(h: &Histogram, range: &PeakRange, sigma: f64) -> Option<f64> {
    let s = smooth(h, sigma).ok()?;
    let bins = s.bins_between(range.lo, range.hi);
    let best = bins.max_by(|&a, &b| s.counts[a].total_cmp(&s.counts[b]))?;
    (s.counts[best] > 0.0).then(|| parabolic_apex(&s, best))
}

fn weighted_mean(h: &Histogram, range: &PeakRange) -> Option<f64> {
    let bins = h.bins_between(range.lo, range.hi);
    let mass: f64 = h.counts[bins.clone()].iter().sum();
    (mass > 0.0).then(|| bins.map(|i| h.bin_center(i) * h.counts[i]).sum::<f64>() / mass)
}

/// Bin edge nearest the midpoint of `a < b`, or the midpoint itself if no
/// edge separates them.
fn split_edge(a: f64, b: f64, bin_width: f64, origin: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let edge = origin + ((mid - origin) / bin_width).round() * bin_width;
    if a < edge && edge <= b {
        edge
    } else {
        mid
    }
}

fn clamp_to(c: f64, r: &PeakRange) -> f64 {
    c.clamp(r.lo, r.hi)
}
