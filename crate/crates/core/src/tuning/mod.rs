//! Repertoire-wide tuning: collect every piece's peaks into a pitch matrix,
//! slide each row rigidly to minimise the summed column spread, then average
//! the columns.

mod derive;
mod matrix;
mod optimize;

pub use derive::{derive_tuning, Tuning, TuningDegree};
pub use matrix::{assemble_matrix, cost, PitchMatrix};
pub use optimize::{brute_force_optimize, optimize, CostTrace, OptimizeResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TuningError {
    #[error("no piece has any peaks")]
    NoPieces,
    #[error("no column reaches the minimum support of {0}")]
    EmptyTuning(usize),
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TuningConfig {
    /// Single-linkage distance for grouping peaks into columns, in cents.
    pub link_threshold: f64,
    /// Maximum number of forward+backward sweeps.
    pub max_sweeps: usize,
    /// Consecutive non-improving row trials before stopping; defaults to
    /// twice the number of rows.
    pub patience: Option<usize>,
    /// Columns with fewer entries are left out of the tuning.
    pub min_support: usize,
    /// Columns at least this spread out are flagged as fluid.
    pub fluid_stdev: f64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            link_threshold: 50.0,
            max_sweeps: 1000,
            patience: None,
            min_support: 1,
            fluid_stdev: 10.0,
        }
    }
}

impl TuningConfig {
    pub fn validate(&self) -> Result<(), TuningError> {
        if !(self.link_threshold > 0.0 && self.link_threshold <= 600.0) {
            return Err(TuningError::InvalidParameter("link_threshold must lie in (0, 600]".into()));
        }
        if self.max_sweeps == 0 || self.patience == Some(0) || self.min_support == 0 {
            return Err(TuningError::InvalidParameter(
                "max_sweeps, patience and min_support must be at least 1".into(),
            ));
        }
        if !(self.fluid_stdev >= 0.0) {
            return Err(TuningError::InvalidParameter("fluid_stdev must be non-negative".into()));
        }
        Ok(())
    }

    pub fn patience_for(&self, rows: usize) -> usize {
        self.patience.unwrap_or(2 * rows.max(1))
    }
}

/// Population standard deviation; zero for fewer than two values.
pub(crate) fn population_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}
