//! Pitch histograms and their peaks.
//!
//! A piece's voiced frames are binned on the cents axis, smoothed with a
//! Gaussian kernel, and split into "mountains" wherever the first difference
//! changes sign. Each mountain is modelled as a Gaussian on a sloped
//! baseline, `c1 + c2*x + c3*exp(-(x - c4)^2 / c5)`, and labelled with one of
//! four shape types.

mod bins;
mod detect;
mod fit;
mod ranges;
mod typology;

pub use bins::{build_histogram, smooth, Histogram};
pub use detect::{
    detect_peaks, detect_peaks_with_score, filter_peaks, modal_peak, PeakAnalysis, HistogramConfig,
};
pub use fit::{fit_points, fit_tilted_gaussian, tilted_gaussian, FitOptions, GaussianFit, MIN_FIT_BINS};
pub use ranges::{find_peak_ranges, local_maxima, PeakRange};
pub use typology::{classify_peak, parabolic_apex, Peak, PeakType, TypologyConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HistogramError {
    #[error("no voiced samples to histogram")]
    EmptyInput,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
