use std::fmt;

use serde::{Deserialize, Serialize};

use super::{local_maxima, GaussianFit, Histogram, PeakRange};
use crate::ingest::MicroMidi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PeakType {
    /// Clean single Gaussian.
    I,
    /// Looks like I, but the score places a second note inside the mountain.
    II,
    /// Two apexes with a real dip between them.
    III,
    /// Flat or rounded top spanning a wide interval.
    IV,
    #[serde(rename = "COMPOSITE")]
    Composite,
}

impl fmt::Display for PeakType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PeakType::I => "I",
            PeakType::II => "II",
            PeakType::III => "III",
            PeakType::IV => "IV",
            PeakType::Composite => "COMPOSITE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    /// Fitted `c4` when the fit is accepted, otherwise the interpolated apex.
    pub center: f64,
    pub range: PeakRange,
    pub mass: f64,
    pub mass_fraction: f64,
    pub peak_type: PeakType,
    pub fit: Option<GaussianFit>,
    /// Alternative centres for double-peaked mountains: the higher apex
    /// first, then the midpoint estimate from the fit.
    pub candidates: Vec<f64>,
    /// Score note this peak was resolved to, if any.
    pub note: Option<MicroMidi>,
    /// Set when score-based refinement found nothing to work with.
    pub unresolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TypologyConfig {
    /// Type III: the dip between two apexes must fall below this fraction of
    /// the lower apex.
    pub valley_ratio: f64,
    /// Type IV: level, relative to the apex, that defines the plateau.
    pub plateau_level: f64,
    /// Type IV: minimum plateau width in cents.
    pub plateau_width: f64,
    /// Type II: the second score note must lie this close to the apex.
    pub secondary_within: f64,
    /// Apexes lower than this fraction of the range maximum are ignored when
    /// looking for a double peak.
    pub secondary_apex_fraction: f64,
    /// Type I needs `rmse <= fit_rmse_gate * c3`.
    pub fit_rmse_gate: f64,
}

impl Default for TypologyConfig {
    fn default() -> Self {
        TypologyConfig {
            valley_ratio: 0.85,
            plateau_level: 0.95,
            plateau_width: 30.0,
            secondary_within: 50.0,
            secondary_apex_fraction: 0.1,
            fit_rmse_gate: 0.15,
        }
    }
}

impl TypologyConfig {
    pub(crate) fn accepts(&self, fit: &GaussianFit, range: &PeakRange) -> bool {
        fit.is_well_formed() && fit.rmse <= self.fit_rmse_gate * fit.c3 && range.covers(fit.c4)
    }
}

/// Labels a peak; the first matching rule wins (III, IV, II, I) and
/// anything else is `Composite`.
///
/// `score_notes` are expected positions (cents) of transcribed notes on
/// the same axis as `h`.
pub fn classify_peak(
    h: &Histogram,
    peak: &Peak,
    score_notes: Option<&[f64]>,
    cfg: &TypologyConfig,
) -> PeakType {
    if double_apex(h, &peak.range, cfg).is_some() {
        return PeakType::III;
    }
    if plateau_width(h, &peak.range, cfg.plateau_level) >= cfg.plateau_width {
        return PeakType::IV;
    }
    if let Some(notes) = score_notes {
        let inside: Vec<f64> = notes.iter().copied().filter(|&n| peak.range.contains(n)).collect();
        if inside.len() >= 2 {
            let main = inside
                .iter()
                .copied()
                .min_by(|a, b| (a - peak.center).abs().total_cmp(&(b - peak.center).abs()))
                .expect("two or more notes");
            // a neighbouring micromidi anchored on this peak sits exactly at
            // 50 cents, so allow for rounding in the anchor arithmetic
            let secondary = inside
                .iter()
                .any(|&n| n != main && (n - peak.center).abs() <= cfg.secondary_within + 1e-9);
            if secondary {
                return PeakType::II;
            }
        }
    }
    match &peak.fit {
        Some(fit) if cfg.accepts(fit, &peak.range) => PeakType::I,
        _ => PeakType::Composite,
    }
}

/// The two most prominent apexes of a double-peaked range, higher first,
/// as interpolated cents positions.
pub(crate) fn double_apex(h: &Histogram, range: &PeakRange, cfg: &TypologyConfig) -> Option<(f64, f64)> {
    let bins = h.bins_between(range.lo, range.hi);
    if bins.is_empty() {
        return None;
    }
    let c = &h.counts;
    let top = c[bins.clone()].iter().copied().fold(0.0, f64::max);
    let apexes: Vec<usize> = local_maxima(c)
        .into_iter()
        .filter(|i| bins.contains(i) && c[*i] >= cfg.secondary_apex_fraction * top)
        .collect();
    let mut best: Option<(usize, usize)> = None;
    for w in apexes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let valley = c[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
        if valley < cfg.valley_ratio * c[a].min(c[b]) {
            let better = match best {
                Some((x, y)) => c[a].min(c[b]) > c[x].min(c[y]),
                None => true,
            };
            if better {
                best = Some((a, b));
            }
        }
    }
    best.map(|(a, b)| {
        let (hi, lo) = if c[a] >= c[b] { (a, b) } else { (b, a) };
        (parabolic_apex(h, hi), parabolic_apex(h, lo))
    })
}

/// Width in cents of the contiguous run of bins around the range maximum
/// that stay at or above `level * max`.
pub(crate) fn plateau_width(h: &Histogram, range: &PeakRange, level: f64) -> f64 {
    let bins = h.bins_between(range.lo, range.hi);
    if bins.is_empty() {
        return 0.0;
    }
    let c = &h.counts;
    let apex = bins.clone().max_by(|&a, &b| c[a].total_cmp(&c[b])).expect("non-empty");
    let cut = level * c[apex];
    let mut left = apex;
    while left > bins.start && c[left - 1] >= cut {
        left -= 1;
    }
    let mut right = apex;
    while right + 1 < bins.end && c[right + 1] >= cut {
        right += 1;
    }
    (right - left + 1) as f64 * h.bin_width
}

/// Sub-bin apex position from a parabola through bin `i` and its neighbours.
pub fn parabolic_apex(h: &Histogram, i: usize) -> f64 {
    let c = &h.counts;
    if i == 0 || i + 1 >= c.len() {
        return h.bin_center(i);
    }
    let (l, m, r) = (c[i - 1], c[i], c[i + 1]);
    let denom = l - 2.0 * m + r;
    let offset = if denom < 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    h.bin_center(i) + offset.clamp(-0.5, 0.5) * h.bin_width
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::{find_peak_ranges, fit_tilted_gaussian};

    fn mixture(parts: &[(f64, f64, f64)]) -> Histogram {
        let counts: Vec<f64> = (0..400)
            .map(|i| {
                let x = -200.0 + i as f64;
                parts.iter().map(|(m, s, a)| a * (-(x - m).powi(2) / (2.0 * s * s)).exp()).sum()
            })
            .collect();
        let total = counts.iter().sum();
        Histogram { bin_width: 1.0, origin: -200.5, counts, total_mass: total }
    }

    fn peak_over(h: &Histogram, range: PeakRange) -> Peak {
        let fit = fit_tilted_gaussian(h, &range).ok();
        let apex = h
            .bins_between(range.lo, range.hi)
            .max_by(|&a, &b| h.counts[a].total_cmp(&h.counts[b]))
            .unwrap();
        let center = fit.map(|f| f.c4).unwrap_or_else(|| parabolic_apex(h, apex));
        let mass = h.mass_between(range.lo, range.hi);
        Peak {
            center,
            range,
            mass,
            mass_fraction: mass / h.total_mass,
            peak_type: PeakType::Composite,
            fit,
            candidates: vec![],
            note: None,
            unresolved: false,
        }
    }

    #[test]
    fn clean_gaussian_is_type_one() {
        let h = mixture(&[(10.0, 12.0, 100.0)]);
        let r = find_peak_ranges(&h, 0.05).unwrap();
        assert_eq!(r.len(), 1);
        let p = peak_over(&h, r[0]);
        let cfg = TypologyConfig::default();
        assert_eq!(classify_peak(&h, &p, Some(&[10.0]), &cfg), PeakType::I);
        assert_eq!(classify_peak(&h, &p, None, &cfg), PeakType::I);
    }

    #[test]
    fn equal_pair_forty_cents_apart_is_type_three() {
        // sd 12: the mid-point dips to about 0.6 of the apexes
        let h = mixture(&[(-20.0, 12.0, 100.0), (20.0, 12.0, 100.0)]);
        let p = peak_over(&h, PeakRange { lo: -100.5, hi: 100.5 });
        let cfg = TypologyConfig::default();
        assert_eq!(classify_peak(&h, &p, None, &cfg), PeakType::III);
        let (hi, lo) = double_apex(&h, &p.range, &cfg).unwrap();
        assert!((hi.abs() - 20.0).abs() < 2.0 && (lo.abs() - 20.0).abs() < 2.0);
    }

    #[test]
    fn shallow_dip_is_not_type_three() {
        // sd 18: the dip stays above 85% of the apexes
        let h = mixture(&[(-20.0, 18.0, 100.0), (20.0, 18.0, 100.0)]);
        let p = peak_over(&h, PeakRange { lo: -100.5, hi: 100.5 });
        assert_ne!(classify_peak(&h, &p, None, &TypologyConfig::default()), PeakType::III);
    }

    #[test]
    fn wide_flat_top_is_type_four() {
        let h = mixture(&[(-25.0, 15.0, 100.0), (0.0, 15.0, 100.0), (25.0, 15.0, 100.0)]);
        let p = peak_over(&h, PeakRange { lo: -120.5, hi: 120.5 });
        assert!(plateau_width(&h, &p.range, 0.95) >= 30.0);
        assert_eq!(classify_peak(&h, &p, None, &TypologyConfig::default()), PeakType::IV);
    }

    #[test]
    fn second_score_note_in_range_is_type_two() {
        let h = mixture(&[(0.0, 12.0, 100.0)]);
        let r = find_peak_ranges(&h, 0.05).unwrap();
        let p = peak_over(&h, r[0]);
        let cfg = TypologyConfig::default();
        assert_eq!(classify_peak(&h, &p, Some(&[0.0, 45.0]), &cfg), PeakType::II);
        // a second note too far from the apex does not count
        assert_eq!(classify_peak(&h, &p, Some(&[0.0, -300.0]), &cfg), PeakType::I);
    }

    #[test]
    fn rejected_fit_is_composite() {
        let h = mixture(&[(0.0, 12.0, 100.0)]);
        let mut p = peak_over(&h, PeakRange { lo: -60.5, hi: 60.5 });
        p.fit = None;
        assert_eq!(classify_peak(&h, &p, None, &TypologyConfig::default()), PeakType::Composite);
    }

    #[test]
    fn deterministic() {
        let h = mixture(&[(-20.0, 12.0, 100.0), (25.0, 14.0, 70.0)]);
        let p = peak_over(&h, PeakRange { lo: -100.5, hi: 100.5 });
        let cfg = TypologyConfig::default();
        let first = classify_peak(&h, &p, Some(&[-20.0, 30.0]), &cfg);
        for _ in 0..10 {
            assert_eq!(classify_peak(&h, &p, Some(&[-20.0, 30.0]), &cfg), first);
        }
    }

    #[test]
    fn parabola_recovers_offset_peak() {
        let h = mixture(&[(0.3, 10.0, 100.0)]);
        let i = h.bin_of(0.3).unwrap();
        assert!((parabolic_apex(&h, i) - 0.3).abs() < 0.02);
    }
}
