//! Synthetic repertoires with known ground truth.
//!
//! A [`SynthConfig`] fixes a tuning (cents above the tonic), how many pieces
//! to make and how noisy to make them. [`GroundTruth::from_config`] draws the
//! per-piece offsets and note sequences, and [`generate_piece`] renders one
//! piece's F0 trace. Everything is a pure function of the seed.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{
    write_f0_csv, write_note_table, IngestError, MicroMidi, NoteEvent, PitchSample, PitchSeries, ScoreSequence,
    DEFAULT_FRAME_HOP,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A degree whose position is drawn afresh for every piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidDegree {
    pub degree: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    /// Degree positions in cents above the tonic; starts at 0.
    pub tuning: Vec<f64>,
    pub pieces: usize,
    pub events_per_piece: usize,
    /// Per-note duration drawn uniformly from this range, in seconds.
    pub note_duration: [f64; 2],
    /// Unvoiced gap between notes, in seconds.
    pub gap: f64,
    /// Per-piece offsets are uniform in `[-offset_range, offset_range]`.
    pub offset_range: f64,
    pub jitter_sd: f64,
    pub vibrato_depth: f64,
    pub vibrato_rate: f64,
    pub tonic_micromidi: u16,
    /// Relative weight of the tonic when drawing notes. Above 1 makes the
    /// tonic the heaviest peak, which the coarse alignment relies on.
    pub tonic_weight: f64,
    pub fluid: Vec<FluidDegree>,
    pub frame_hop: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            tuning: vec![0.0, 145.0, 295.0, 500.0, 700.0, 845.0, 1000.0],
            pieces: 12,
            events_per_piece: 40,
            note_duration: [0.4, 1.2],
            gap: 0.1,
            offset_range: 40.0,
            jitter_sd: 15.0,
            vibrato_depth: 0.0,
            vibrato_rate: 5.5,
            tonic_micromidi: 110,
            tonic_weight: 3.0,
            fluid: Vec::new(),
            frame_hop: DEFAULT_FRAME_HOP,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.to_string()));
        if self.tuning.is_empty() || self.tuning[0] != 0.0 {
            return bad("tuning must start at 0 cents");
        }
        if self.tuning.windows(2).any(|w| !(w[0] < w[1])) || self.tuning.iter().any(|t| !t.is_finite()) {
            return bad("tuning must be strictly increasing");
        }
        if self.pieces == 0 || self.events_per_piece == 0 {
            return bad("pieces and events_per_piece must be at least 1");
        }
        let [lo, hi] = self.note_duration;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("note_duration must be a positive range");
        }
        if !(self.frame_hop > 0.0 && lo >= self.frame_hop) {
            return bad("frame_hop must be positive and shorter than any note");
        }
        if !(self.gap >= 0.0 && self.offset_range >= 0.0 && self.jitter_sd >= 0.0) {
            return bad("gap, offset_range and jitter_sd must be non-negative");
        }
        if !(self.vibrato_depth >= 0.0 && self.vibrato_rate >= 0.0) {
            return bad("vibrato depth and rate must be non-negative");
        }
        if !(self.tonic_weight > 0.0) {
            return bad("tonic_weight must be positive");
        }
        if self.tuning.len() > 1 && self.events_per_piece < self.tuning.len() {
            return bad("events_per_piece must cover every degree");
        }
        MicroMidi::new(self.tonic_micromidi).map_err(|e| SynthError::Config(e.to_string()))?;
        for f in &self.fluid {
            if f.degree == 0 || f.degree >= self.tuning.len() || !(f.lo <= f.hi) {
                return bad("fluid degree must name a non-tonic degree with lo <= hi");
            }
            let below = self.tuning[f.degree - 1];
            let above = self.tuning.get(f.degree + 1).copied().unwrap_or(f64::INFINITY);
            if !(f.lo > below && f.hi < above) {
                return bad("fluid range must stay between the neighbouring degrees");
            }
        }
        Ok(())
    }
}

/// Everything needed to regenerate a corpus, and to score an analysis of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub tuning: Vec<f64>,
    pub piece_ids: Vec<String>,
    pub per_piece_offset: Vec<f64>,
    /// Degree positions per piece before the offset; differs from `tuning`
    /// only at fluid degrees.
    pub per_piece_tuning: Vec<Vec<f64>>,
    /// Degree index of every event, per piece.
    pub degree_sequences: Vec<Vec<usize>>,
    pub note_sequences: Vec<ScoreSequence>,
    /// Score note written for each degree.
    pub degree_notes: Vec<MicroMidi>,
    pub tonic_hz: f64,
    pub jitter_sd: f64,
    pub vibrato: (f64, f64),
    pub gap: f64,
    pub frame_hop: f64,
    pub fluid_degrees: Vec<usize>,
    pub seed: u64,
}

/// A rendered piece. `sample_events` gives the event behind each sample
/// (`None` in gaps).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPiece {
    pub series: PitchSeries,
    pub score: ScoreSequence,
    pub sample_events: Vec<Option<usize>>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn frames_for(seconds: f64, hop: f64) -> usize {
    (seconds / hop).round() as usize
}

impl GroundTruth {
    pub fn from_config(cfg: &SynthConfig) -> Result<Self, SynthError> {
        cfg.validate()?;
        let degree_notes = degree_notes(&cfg.tuning, cfg.tonic_micromidi)?;
        let tonic = MicroMidi::new(cfg.tonic_micromidi)?;
        let tonic_hz = 440.0 * 2f64.powf((tonic.value() as f64 / 2.0 - 69.0) / 12.0);
        let mut rng = rng_for(cfg.seed, 0);
        let k = cfg.tuning.len();
        let width = (cfg.pieces - 1).to_string().len().max(3);

        let mut gt = GroundTruth {
            tuning: cfg.tuning.clone(),
            piece_ids: (0..cfg.pieces).map(|i| format!("piece{i:0width$}")).collect(),
            per_piece_offset: Vec::with_capacity(cfg.pieces),
            per_piece_tuning: Vec::with_capacity(cfg.pieces),
            degree_sequences: Vec::with_capacity(cfg.pieces),
            note_sequences: Vec::with_capacity(cfg.pieces),
            degree_notes,
            tonic_hz,
            jitter_sd: cfg.jitter_sd,
            vibrato: (cfg.vibrato_depth, cfg.vibrato_rate),
            gap: cfg.gap,
            frame_hop: cfg.frame_hop,
            fluid_degrees: cfg.fluid.iter().map(|f| f.degree).collect(),
            seed: cfg.seed,
        };
        for _ in 0..cfg.pieces {
            let offset = if cfg.offset_range > 0.0 {
                rng.random_range(-cfg.offset_range..=cfg.offset_range)
            } else {
                0.0
            };
            let mut tuning = cfg.tuning.clone();
            for f in &cfg.fluid {
                tuning[f.degree] = rng.random_range(f.lo..=f.hi);
            }
            let (degrees, durations) = draw_sequence(&mut rng, cfg, k);
            let events = degrees
                .iter()
                .zip(&durations)
                .map(|(&d, &dur)| NoteEvent::new(gt.degree_notes[d], dur))
                .collect::<Result<Vec<_>, _>>()?;
            gt.per_piece_offset.push(offset);
            gt.per_piece_tuning.push(tuning);
            gt.degree_sequences.push(degrees);
            gt.note_sequences.push(ScoreSequence::new(events));
        }
        Ok(gt)
    }

    pub fn piece_count(&self) -> usize {
        self.piece_ids.len()
    }

    /// Ground-truth cents of each degree in piece `i`, relative to the
    /// tonic of the corpus.
    pub fn piece_degrees(&self, i: usize) -> Vec<f64> {
        self.per_piece_tuning[i].iter().map(|t| t + self.per_piece_offset[i]).collect()
    }
}

/// Score note for each degree: the nearest micromidi to its position,
/// nudged up when two degrees would share one.
fn degree_notes(tuning: &[f64], tonic: u16) -> Result<Vec<MicroMidi>, SynthError> {
    let mut out: Vec<MicroMidi> = Vec::with_capacity(tuning.len());
    for t in tuning {
        let mut v = tonic as i64 + (t / 50.0).round() as i64;
        if let Some(prev) = out.last() {
            v = v.max(prev.value() as i64 + 1);
        }
        let v = u16::try_from(v).map_err(|_| SynthError::Config("tuning leaves the micromidi range".into()))?;
        out.push(MicroMidi::new(v).map_err(|e| SynthError::Config(e.to_string()))?);
    }
    Ok(out)
}

/// Degrees and frame-quantised durations for one piece. The first events
/// visit every degree once; later ones are weighted draws that never repeat
/// the previous degree. Redrawn until the tonic carries clearly the most
/// frames, so the tonic is the piece's heaviest peak.
fn draw_sequence(rng: &mut ChaCha8Rng, cfg: &SynthConfig, k: usize) -> (Vec<usize>, Vec<f64>) {
    let hop = cfg.frame_hop;
    let [lo, hi] = cfg.note_duration;
    loop {
        let mut degrees: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            degrees.swap(i, rng.random_range(0..=i));
        }
        while degrees.len() < cfg.events_per_piece {
            let prev = *degrees.last().expect("k >= 1");
            if k == 1 {
                degrees.push(0);
                continue;
            }
            let total: f64 = (0..k).filter(|&d| d != prev).map(|d| weight(d, cfg)).sum();
            let mut x = rng.random_range(0.0..total);
            let mut pick = if prev == k - 1 { k - 2 } else { k - 1 };
            for d in (0..k).filter(|&d| d != prev) {
                x -= weight(d, cfg);
                if x < 0.0 {
                    pick = d;
                    break;
                }
            }
            degrees.push(pick);
        }
        degrees.truncate(cfg.events_per_piece);
        let durations: Vec<f64> = degrees
            .iter()
            .map(|_| frames_for(rng.random_range(lo..=hi), hop).max(1) as f64 * hop)
            .collect();
        let mut per_degree = vec![0.0; k];
        for (d, t) in degrees.iter().zip(&durations) {
            per_degree[*d] += t;
        }
        let runner_up = per_degree[1..].iter().copied().fold(0.0, f64::max);
        if k == 1 || per_degree[0] >= 1.2 * runner_up {
            return (degrees, durations);
        }
    }
}

fn weight(degree: usize, cfg: &SynthConfig) -> f64 {
    if degree == 0 {
        cfg.tonic_weight
    } else {
        1.0
    }
}

/// Renders piece `i`. Notes follow one another with `gap` seconds of
/// unvoiced frames in between; each frame sits at the degree position plus
/// the piece offset, a vibrato sinusoid and Gaussian jitter.
pub fn generate_piece(gt: &GroundTruth, i: usize) -> Result<SynthPiece, SynthError> {
    if i >= gt.piece_count() {
        return Err(SynthError::Config(format!("piece {i} out of {}", gt.piece_count())));
    }
    let mut rng = rng_for(gt.seed, i as u64 + 1);
    let jitter = Normal::new(0.0, gt.jitter_sd).map_err(|e| SynthError::Config(e.to_string()))?;
    let (depth, rate) = gt.vibrato;
    let hop = gt.frame_hop;
    let degrees = gt.piece_degrees(i);
    let score = gt.note_sequences[i].clone();
    let gap_frames = frames_for(gt.gap, hop);

    let mut samples = Vec::new();
    let mut sample_events = Vec::new();
    for (e, (event, &d)) in score.events.iter().zip(&gt.degree_sequences[i]).enumerate() {
        if e > 0 {
            for _ in 0..gap_frames {
                samples.push(PitchSample::unvoiced(samples.len() as f64 * hop));
                sample_events.push(None);
            }
        }
        let frames = (event.duration / hop).round() as usize;
        let phase = rng.random_range(0.0..TAU);
        for f in 0..frames {
            let mut cents = degrees[d];
            if depth > 0.0 {
                cents += depth * (TAU * rate * f as f64 * hop + phase).sin();
            }
            if gt.jitter_sd > 0.0 {
                cents += jitter.sample(&mut rng);
            }
            let time = samples.len() as f64 * hop;
            samples.push(PitchSample::voiced(time, gt.tonic_hz * (cents / 1200.0).exp2()));
            sample_events.push(Some(e));
        }
    }
    let series = PitchSeries::new(samples, hop, gt.tonic_hz)?;
    Ok(SynthPiece { series, score, sample_events })
}

/// Doubles the frequency of every voiced frame with `start <= t < end`.
pub fn inject_octave_error(s: &PitchSeries, start: f64, end: f64) -> Result<PitchSeries, SynthError> {
    if !(start >= 0.0 && start < end && end <= s.duration() + s.frame_hop()) {
        return Err(IngestError::Domain(format!("invalid injection span [{start}, {end})")).into());
    }
    let f0 = s
        .samples()
        .iter()
        .map(|p| p.f0.map(|f| if p.time >= start && p.time < end { f * 2.0 } else { f }))
        .collect();
    Ok(s.with_f0(f0))
}

/// Writes `<id>.f0.csv` and `<id>.notes.csv` for every piece plus
/// `ground_truth.json` into `dir`, generating pieces in parallel. Returns the
/// written paths, manifest last.
pub fn write_corpus(gt: &GroundTruth, dir: &Path) -> Result<Vec<PathBuf>, SynthError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SynthError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let per_piece: Vec<Vec<PathBuf>> = (0..gt.piece_count())
        .into_par_iter()
        .map(|i| {
            let piece = generate_piece(gt, i)?;
            let f0 = dir.join(format!("{}.f0.csv", gt.piece_ids[i]));
            let notes = dir.join(format!("{}.notes.csv", gt.piece_ids[i]));
            std::fs::write(&f0, write_f0_csv(&piece.series)).map_err(io(&f0))?;
            std::fs::write(&notes, write_note_table(&piece.score)).map_err(io(&notes))?;
            Ok(vec![f0, notes])
        })
        .collect::<Result<_, SynthError>>()?;
    let manifest = dir.join("ground_truth.json");
    let json = serde_json::to_string_pretty(gt).expect("ground truth serialises");
    std::fs::write(&manifest, json + "\n").map_err(io(&manifest))?;
    let mut out: Vec<PathBuf> = per_piece.into_iter().flatten().collect();
    out.push(manifest);
    Ok(out)
}
