use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::HistogramError;
use crate::ingest::PitchSeries;

/// Binned cents distribution. Bin `i` covers
/// `[origin + i*bin_width, origin + (i+1)*bin_width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub origin: f64,
    pub counts: Vec<f64>,
    pub total_mass: f64,
}

impl Histogram {
    /// Bins `values` on a grid whose bin centres are integer multiples of
    /// `bin_width`, so histograms built from different frame subsets of the
    /// same piece line up bin for bin.
    pub fn from_values(values: &[f64], bin_width: f64) -> Result<Self, HistogramError> {
        check_width(bin_width)?;
        if values.is_empty() {
            return Ok(Histogram::empty(bin_width));
        }
        let key = |c: f64| (c / bin_width + 0.5).floor() as i64;
        let lo = values.iter().map(|&c| key(c)).min().expect("non-empty");
        let hi = values.iter().map(|&c| key(c)).max().expect("non-empty");
        let mut counts = vec![0.0; (hi - lo + 1) as usize];
        for &c in values {
            counts[(key(c) - lo) as usize] += 1.0;
        }
        Ok(Histogram {
            bin_width,
            origin: (lo as f64 - 0.5) * bin_width,
            total_mass: values.len() as f64,
            counts,
        })
    }

    /// Bins `values` from an explicit left edge. Every value must be at or
    /// above `origin`.
    pub fn from_values_with_origin(
        values: &[f64],
        bin_width: f64,
        origin: f64,
    ) -> Result<Self, HistogramError> {
        check_width(bin_width)?;
        let mut counts: Vec<f64> = Vec::new();
        for &c in values {
            if !(c >= origin) {
                return Err(HistogramError::InvalidParameter(format!(
                    "value {c} lies below origin {origin}"
                )));
            }
            let i = ((c - origin) / bin_width).floor() as usize;
            if counts.len() <= i {
                counts.resize(i + 1, 0.0);
            }
            counts[i] += 1.0;
        }
        Ok(Histogram {
            bin_width,
            origin,
            total_mass: values.len() as f64,
            counts,
        })
    }

    pub fn empty(bin_width: f64) -> Self {
        Histogram {
            bin_width,
            origin: 0.0,
            counts: Vec::new(),
            total_mass: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.bin_width
    }

    pub fn bin_edge(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.bin_width
    }

    /// Index of the bin containing `cents`, if it lies on the histogram.
    pub fn bin_of(&self, cents: f64) -> Option<usize> {
        let x = (cents - self.origin) / self.bin_width;
        if x >= 0.0 && (x as usize) < self.counts.len() {
            Some(x as usize)
        } else {
            None
        }
    }

    /// Bins whose centres fall in `[lo, hi)`.
    pub fn bins_between(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = ((lo - self.origin) / self.bin_width - 0.5).ceil().max(0.0) as usize;
        let end = ((hi - self.origin) / self.bin_width - 0.5).ceil().max(0.0) as usize;
        first.min(self.len())..end.min(self.len())
    }

    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.counts[self.bins_between(lo, hi)].iter().sum()
    }

    pub fn max_count(&self) -> f64 {
        self.counts.iter().copied().fold(0.0, f64::max)
    }

    /// Histogram translated along the cents axis.
    pub fn shifted(&self, cents: f64) -> Self {
        Histogram {
            origin: self.origin + cents,
            ..self.clone()
        }
    }

    /// `bin_center_cents,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center_cents,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(out, "{},{}", self.bin_center(i), c).expect("writing to a String");
        }
        out
    }
}

fn check_width(bin_width: f64) -> Result<(), HistogramError> {
    if bin_width > 0.0 && bin_width.is_finite() {
        Ok(())
    } else {
        Err(HistogramError::InvalidParameter(format!(
            "bin width must be positive, got {bin_width}"
        )))
    }
}

/// One count per voiced frame; unvoiced frames are skipped.
pub fn build_histogram(series: &PitchSeries, bin_width: f64) -> Result<Histogram, HistogramError> {
    let cents = series.voiced_cents();
    if cents.is_empty() {
        return Err(HistogramError::EmptyInput);
    }
    Histogram::from_values(&cents, bin_width)
}

/// Convolves with a Gaussian of standard deviation `sigma` cents, truncated
/// at four sigma and normalised to unit sum. The result is padded by the
/// kernel half-width on both sides so no mass falls off the ends.
pub fn smooth(h: &Histogram, sigma: f64) -> Result<Histogram, HistogramError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(HistogramError::InvalidParameter(format!(
            "smoothing sigma must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 || h.is_empty() {
        return Ok(h.clone());
    }
    let half = (4.0 * sigma / h.bin_width).ceil() as usize;
    let mut kernel: Vec<f64> = (0..=2 * half)
        .map(|k| {
            let x = (k as f64 - half as f64) * h.bin_width;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= norm);

    let mut out = vec![0.0; h.len() + 2 * half];
    for (i, &c) in h.counts.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (k, w) in kernel.iter().enumerate() {
            out[i + k] += c * w;
        }
    }
    Ok(Histogram {
        bin_width: h.bin_width,
        origin: h.origin - half as f64 * h.bin_width,
        counts: out,
        total_mass: h.total_mass,
    })
}
