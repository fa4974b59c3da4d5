//! Run configuration, read from TOML.
//!
//! Every section is optional and falls back to the defaults of the stage it
//! configures. Unknown keys are rejected so that a typo never silently runs
//! with a default.
//!
//! ```toml
//! seed = 7
//!
//! [input]
//! dir = "corpus"          # every *.f0.csv in here, with sibling notes/octave files
//!
//! [histogram]
//! sigma = 6.0
//!
//! [tuning]
//! max_sweeps = 500
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{AlignConfig, RefineConfig};
use crate::histogram::HistogramConfig;
use crate::ingest::AutoOctaveConfig;
use crate::synthkit::SynthConfig;
use crate::tuning::TuningConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OctaveMode {
    /// Manual spans from `<id>.octave.csv` when present, automatic otherwise.
    #[default]
    Auto,
    /// Manual spans only.
    Manual,
    Off,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputConfig {
    /// Directory scanned for `*.f0.csv`.
    pub dir: Option<PathBuf>,
    /// Explicit F0 files, in addition to `dir`.
    pub f0: Vec<PathBuf>,
    /// Cents reference. When absent each piece is referenced to its own
    /// heaviest peak.
    pub ref_hz: Option<f64>,
    /// Overrides the frame hop inferred from the timestamps.
    pub frame_hop: Option<f64>,
    pub octave: OctaveMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    /// Apply score-informed refinement before tuning.
    pub refine: bool,
    /// Largest distance, in cents, at which a peak takes a score note's name.
    pub label_distance: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            refine: true,
            label_distance: 35.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub input: InputConfig,
    pub octave: AutoOctaveConfig,
    pub histogram: HistogramConfig,
    pub align: AlignConfig,
    pub refine: RefineConfig,
    pub report: ReportConfig,
    pub tuning: TuningConfig,
    pub synth: SynthConfig,
}

/// One piece on disk.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PieceFiles {
    pub id: String,
    pub f0: PathBuf,
    pub notes: Option<PathBuf>,
    pub octave: Option<PathBuf>,
}

impl RunConfig {
    /// Reads and validates a config file. Relative input paths are resolved
    /// against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.input.dir = cfg.input.dir.map(|d| base.join(d));
        cfg.input.f0 = cfg.input.f0.iter().map(|p| base.join(p)).collect();
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("<inline>"),
            message: e.message().to_string() + &span_hint(text, e.span()),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(r) = self.input.ref_hz {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("input.ref_hz", "must be positive"));
            }
        }
        if let Some(h) = self.input.frame_hop {
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid("input.frame_hop", "must be positive"));
            }
        }
        if !(self.octave.window_cents > 0.0 && self.octave.window_cents < 600.0) {
            return Err(invalid("octave.window_cents", "must lie in (0, 600)"));
        }
        self.histogram.validate().map_err(|e| invalid("histogram", e))?;
        self.align.validate().map_err(|e| invalid("align", e))?;
        let r = &self.refine;
        if !(r.dominance > 0.5 && r.dominance <= 1.0) {
            return Err(invalid("refine.dominance", "must lie in (0.5, 1]"));
        }
        if !(r.split_share > 0.0 && r.split_share <= 0.5) {
            return Err(invalid("refine.split_share", "must lie in (0, 0.5]"));
        }
        if !(r.sigma >= 0.0) {
            return Err(invalid("refine.sigma", "must be non-negative"));
        }
        if !(self.report.label_distance >= 0.0) {
            return Err(invalid("report.label_distance", "must be non-negative"));
        }
        self.tuning.validate().map_err(|e| invalid("tuning", e))?;
        self.synth.validate().map_err(|e| invalid("synth", e))?;
        Ok(())
    }

    /// The pieces named by `input.dir` and `input.f0`, sorted by id.
    pub fn pieces(&self) -> Result<Vec<PieceFiles>, ConfigError> {
        let mut f0s = self.input.f0.clone();
        if let Some(dir) = &self.input.dir {
            let entries = std::fs::read_dir(dir).map_err(|source| ConfigError::Read {
                path: dir.clone(),
                source,
            })?;
            for entry in entries.flatten() {
                let p = entry.path();
                if p.to_string_lossy().ends_with(".f0.csv") {
                    f0s.push(p);
                }
            }
        }
        if f0s.is_empty() {
            return Err(invalid("input", "no F0 files configured (set input.dir or input.f0)"));
        }
        let mut out: Vec<PieceFiles> = f0s.into_iter().map(piece_files).collect();
        out.sort();
        out.dedup_by(|a, b| a.f0 == b.f0);
        if let Some(w) = out.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(invalid("input", format!("two inputs share the piece id `{}`", w[0].id)));
        }
        Ok(out)
    }
}

fn piece_files(f0: PathBuf) -> PieceFiles {
    let name = f0.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let id = name
        .strip_suffix(".f0.csv")
        .or_else(|| name.strip_suffix(".csv"))
        .unwrap_or(&name)
        .to_string();
    let sibling = |suffix: &str| {
        let p = f0.with_file_name(format!("{id}{suffix}"));
        p.is_file().then_some(p)
    };
    PieceFiles {
        notes: sibling(".notes.csv"),
        octave: sibling(".octave.csv"),
        id,
        f0,
    }
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    let Some(span) = span else { return String::new() };
    let line = text[..span.start.min(text.len())].lines().count().max(1);
    format!(" (line {line})")
}
