//! The stages wired together: one piece from F0 trace to labelled peaks, and
//! a whole repertoire from pieces to tuning.

use rayon::prelude::*;

use crate::align::{
    choose_anchor, dtw_align, label_peaks, note_histograms, refine_peaks, score_to_cents, Anchor, AlignmentPath,
    NoteHistogramSet,
};
use crate::config::{OctaveMode, PieceFiles, RunConfig};
use crate::histogram::{detect_peaks, detect_peaks_with_score, modal_peak, Peak, PeakAnalysis};
use crate::ingest::{
    correct_octave_errors, parse_f0_csv, parse_note_table, parse_octave_spans, F0CsvOptions, OctavePolicy,
    OctaveSpan, PitchSeries, ScoreSequence,
};
use crate::tuning::{assemble_matrix, derive_tuning, optimize, OptimizeResult, PitchMatrix, Tuning};
use crate::{Error, Result};

/// A piece as read from disk, before any analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct PieceInput {
    pub id: String,
    pub series: PitchSeries,
    pub score: Option<ScoreSequence>,
    pub octave_spans: Option<Vec<OctaveSpan>>,
}

pub fn load_piece(files: &PieceFiles, cfg: &RunConfig) -> Result<PieceInput> {
    let read = |p: &std::path::Path| std::fs::read_to_string(p).map_err(Error::io(p));
    let opts = F0CsvOptions {
        ref_hz: cfg.input.ref_hz,
        frame_hop: cfg.input.frame_hop,
    };
    let series = parse_f0_csv(&read(&files.f0)?, &opts).map_err(|e| tag(&files.f0, e))?;
    let score = match &files.notes {
        Some(p) => Some(parse_note_table(&read(p)?).map_err(|e| tag(p, e))?).filter(|s| !s.is_absent()),
        None => None,
    };
    let octave_spans = match &files.octave {
        Some(p) => Some(parse_octave_spans(&read(p)?).map_err(|e| tag(p, e))?),
        None => None,
    };
    Ok(PieceInput {
        id: files.id.clone(),
        series,
        score,
        octave_spans,
    })
}

fn tag(path: &std::path::Path, e: crate::ingest::IngestError) -> crate::ingest::IngestError {
    use crate::ingest::IngestError as E;
    let p = path.display();
    match e {
        E::Format { row, message } => E::Format {
            row,
            message: format!("{message} in {p}"),
        },
        E::Domain(m) => E::Domain(format!("{p}: {m}")),
        E::Config(m) => E::Config(format!("{p}: {m}")),
    }
}

/// The score side of an analysis.
#[derive(Debug, Clone)]
pub struct ScoreAlignment {
    pub anchor: Anchor,
    /// Expected cents of every score event.
    pub expected: Vec<f64>,
    pub path: AlignmentPath,
    pub notes: NoteHistogramSet,
}

#[derive(Debug, Clone)]
pub struct PieceAnalysis {
    pub id: String,
    /// Octave-repaired and referenced to the final cents origin.
    pub series: PitchSeries,
    pub score: Option<ScoreSequence>,
    pub histogram: PeakAnalysis,
    pub alignment: Option<ScoreAlignment>,
    /// Final peaks: refined and labelled when a score is available.
    pub peaks: Vec<Peak>,
}

/// Octave repair, cents reference, peak detection, and, when a score is
/// present, alignment, score-aware typing, refinement and labelling.
///
/// Without a configured reference the piece is first analysed against a
/// provisional one, then re-referenced so its heaviest peak sits near 0.
pub fn analyse_piece(input: &PieceInput, cfg: &RunConfig) -> Result<PieceAnalysis> {
    let repaired = match (cfg.input.octave, &input.octave_spans) {
        (OctaveMode::Off, _) | (OctaveMode::Manual, None) => input.series.clone(),
        (_, Some(spans)) => correct_octave_errors(&input.series, &OctavePolicy::Manual(spans.clone()))?,
        (OctaveMode::Auto, None) => correct_octave_errors(&input.series, &OctavePolicy::Automatic(cfg.octave))?,
    };
    let series = if cfg.input.ref_hz.is_some() {
        repaired
    } else {
        let first = detect_peaks(&repaired, &cfg.histogram)?;
        let modal = modal_peak(&first.peaks).ok_or(crate::histogram::HistogramError::EmptyInput)?;
        let ref_hz = repaired.ref_hz() * (modal.center / 1200.0).exp2();
        repaired.with_ref_hz(ref_hz)?
    };
    let histogram = detect_peaks(&series, &cfg.histogram)?;

    let Some(score) = input.score.clone() else {
        let peaks = histogram.peaks.clone();
        return Ok(PieceAnalysis {
            id: input.id.clone(),
            series,
            score: None,
            histogram,
            alignment: None,
            peaks,
        });
    };
    let Some(anchor) = choose_anchor(&score, &histogram.peaks) else {
        log::warn!("{}: no peaks to anchor the score on", input.id);
        let peaks = histogram.peaks.clone();
        return Ok(PieceAnalysis {
            id: input.id.clone(),
            series,
            score: Some(score),
            histogram,
            alignment: None,
            peaks,
        });
    };
    let expected = score_to_cents(&score, anchor);
    let path = dtw_align(&series, &expected, &score.durations(), &cfg.align)?;
    let notes = note_histograms(&series, &path, &score, cfg.histogram.bin_width)?;
    let distinct = score.distinct_notes();
    let note_cents: Vec<f64> = distinct.iter().map(|n| anchor.cents_of(*n)).collect();
    let histogram = detect_peaks_with_score(&series, &cfg.histogram, Some(&note_cents))?;
    let mut peaks = if cfg.report.refine {
        refine_peaks(&histogram.peaks, &notes, anchor, &cfg.refine)
    } else {
        histogram.peaks.clone()
    };
    label_peaks(&mut peaks, &distinct, anchor, cfg.report.label_distance);
    Ok(PieceAnalysis {
        id: input.id.clone(),
        series,
        score: Some(score),
        histogram,
        alignment: Some(ScoreAlignment {
            anchor,
            expected,
            path,
            notes,
        }),
        peaks,
    })
}

/// Loads and analyses every piece on the current rayon pool, keeping input
/// order.
pub fn analyse_all(pieces: &[PieceFiles], cfg: &RunConfig) -> Result<Vec<PieceAnalysis>> {
    pieces
        .par_iter()
        .map(|f| analyse_piece(&load_piece(f, cfg)?, cfg))
        .collect()
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub initial: PitchMatrix,
    pub optimized: OptimizeResult,
    /// The optimised matrix with its best-supported column at 0.
    pub matrix: PitchMatrix,
    pub tuning: Tuning,
}

/// Assemble, optimise and average across analysed pieces.
pub fn tune(pieces: &[PieceAnalysis], cfg: &RunConfig) -> Result<TuneOutcome> {
    let sets: Vec<(String, Vec<Peak>)> = pieces.iter().map(|p| (p.id.clone(), p.peaks.clone())).collect();
    let initial = assemble_matrix(&sets, cfg.tuning.link_threshold)?;
    let patience = cfg.tuning.patience_for(initial.row_count());
    let optimized = optimize(&initial, cfg.tuning.max_sweeps, patience)?;
    let matrix = optimized.matrix.gauge_fixed();
    let tuning = derive_tuning(&matrix, cfg.tuning.min_support, cfg.tuning.fluid_stdev)?;
    Ok(TuneOutcome {
        initial,
        optimized,
        matrix,
        tuning,
    })
}
