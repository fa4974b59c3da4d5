use serde::{Deserialize, Serialize};

use super::ranges::range_bins;
use super::typology::double_apex;
use super::{
    build_histogram, classify_peak, fit_tilted_gaussian, parabolic_apex, smooth, Histogram,
    HistogramError, Peak, PeakRange, PeakType, TypologyConfig, MIN_FIT_BINS,
};
use crate::ingest::PitchSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HistogramConfig {
    pub bin_width: f64,
    pub sigma: f64,
    pub min_mass_fraction: f64,
    pub min_prominence_fraction: f64,
    pub typology: TypologyConfig,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            bin_width: 1.0,
            sigma: 6.0,
            min_mass_fraction: 0.01,
            min_prominence_fraction: 0.05,
            typology: TypologyConfig::default(),
        }
    }
}

impl HistogramConfig {
    pub fn validate(&self) -> Result<(), HistogramError> {
        let bad = |what: &str| Err(HistogramError::InvalidParameter(what.to_string()));
        if !(self.bin_width > 0.0 && self.bin_width <= 50.0) {
            return bad("bin_width must lie in (0, 50]");
        }
        if !(self.sigma >= 0.0 && self.sigma <= 100.0) {
            return bad("sigma must lie in [0, 100]");
        }
        if !(0.0..1.0).contains(&self.min_mass_fraction) {
            return bad("min_mass_fraction must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.min_prominence_fraction) {
            return bad("min_prominence_fraction must lie in [0, 1)");
        }
        let t = &self.typology;
        if !(t.valley_ratio > 0.0 && t.valley_ratio <= 1.0)
            || !(t.plateau_level > 0.0 && t.plateau_level <= 1.0)
            || !(t.fit_rmse_gate > 0.0)
            || !(t.plateau_width > 0.0)
            || !(t.secondary_within > 0.0)
            || !(0.0..1.0).contains(&t.secondary_apex_fraction)
        {
            return bad("typology keys out of range");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PeakAnalysis {
    pub histogram: Histogram,
    pub smoothed: Histogram,
    /// Ascending by centre.
    pub peaks: Vec<Peak>,
}

pub fn detect_peaks(series: &PitchSeries, cfg: &HistogramConfig) -> Result<PeakAnalysis, HistogramError> {
    detect_peaks_with_score(series, cfg, None)
}

/// build -> smooth -> ranges -> fit -> filter -> classify.
///
/// Fits run on the smoothed histogram. A fit that fails the acceptance gate
/// is kept for reporting but the centre falls back to the interpolated apex.
/// For double-peaked mountains the centre defaults to the higher apex, with
/// both alternatives kept in [`Peak::candidates`].
pub fn detect_peaks_with_score(
    series: &PitchSeries,
    cfg: &HistogramConfig,
    score_notes: Option<&[f64]>,
) -> Result<PeakAnalysis, HistogramError> {
    cfg.validate()?;
    let histogram = build_histogram(series, cfg.bin_width)?;
    let smoothed = smooth(&histogram, cfg.sigma)?;
    let mut peaks = Vec::new();
    for (a, b, apex) in range_bins(&smoothed, cfg.min_prominence_fraction)? {
        let range = PeakRange {
            lo: smoothed.bin_edge(a),
            hi: smoothed.bin_edge(b),
        };
        let mass: f64 = smoothed.counts[a..b].iter().sum();
        let fit = if b - a >= MIN_FIT_BINS {
            fit_tilted_gaussian(&smoothed, &range).ok()
        } else {
            None
        };
        let center = match &fit {
            Some(f) if cfg.typology.accepts(f, &range) => f.c4,
            _ => parabolic_apex(&smoothed, apex),
        };
        peaks.push(Peak {
            center,
            range,
            mass,
            mass_fraction: mass / smoothed.total_mass,
            peak_type: PeakType::Composite,
            fit,
            candidates: Vec::new(),
            note: None,
            unresolved: false,
        });
    }
    let mut peaks = filter_peaks(peaks, cfg.min_mass_fraction);
    for p in &mut peaks {
        p.peak_type = classify_peak(&smoothed, p, score_notes, &cfg.typology);
        if p.peak_type == PeakType::III {
            if let Some((higher, _)) = double_apex(&smoothed, &p.range, &cfg.typology) {
                p.candidates.push(higher);
                if let Some(f) = p.fit.filter(|f| f.is_well_formed() && p.range.covers(f.c4)) {
                    p.candidates.push(f.c4);
                }
                p.center = higher;
            }
        }
    }
    peaks.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(PeakAnalysis {
        histogram,
        smoothed,
        peaks,
    })
}

/// Drops peaks carrying less than `min_mass_fraction` of the histogram.
pub fn filter_peaks(peaks: Vec<Peak>, min_mass_fraction: f64) -> Vec<Peak> {
    let mut kept: Vec<Peak> = peaks
        .into_iter()
        .filter(|p| p.mass_fraction >= min_mass_fraction)
        .collect();
    kept.sort_by(|a, b| a.center.total_cmp(&b.center));
    kept
}

/// Peak with the largest mass; ties go to the lower centre.
pub fn modal_peak(peaks: &[Peak]) -> Option<&Peak> {
    peaks.iter().fold(None, |best: Option<&Peak>, p| match best {
        Some(b) if b.mass >= p.mass => Some(b),
        _ => Some(p),
    })
}
