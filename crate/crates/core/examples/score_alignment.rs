//! Aligns a synthetic trace to its score and builds per-note histograms.

use intonation::align::{choose_anchor, dtw_align, note_histograms, score_to_cents, AlignConfig};
use intonation::histogram::{detect_peaks, HistogramConfig};
use intonation::synthkit::{generate_piece, GroundTruth, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { pieces: 1, events_per_piece: 20, offset_range: 0.0, seed: 3, ..SynthConfig::default() };
    let gt = GroundTruth::from_config(&cfg)?;
    let piece = generate_piece(&gt, 0)?;
    let peaks = detect_peaks(&piece.series, &HistogramConfig::default())?.peaks;

    let anchor = choose_anchor(&piece.score, &peaks).ok_or("no anchor")?;
    let expected = score_to_cents(&piece.score, anchor);
    let path = dtw_align(&piece.series, &expected, &piece.score.durations(), &AlignConfig::default())?;

    let aligned = path.sample_events();
    let (mut right, mut total) = (0, 0);
    for (k, truth) in piece.sample_events.iter().enumerate() {
        if let Some(e) = truth {
            total += 1;
            right += usize::from(aligned[k] == *e);
        }
    }
    println!("anchor {} at {:.1} cents", anchor.note, anchor.cents);
    println!("{right}/{total} voiced frames on the right event, path cost {:.0}", path.cost);

    let notes = note_histograms(&piece.series, &path, &piece.score, 1.0)?;
    for (note, h) in &notes.per_note {
        println!("{:>10}: {:>5} frames", note.to_string(), h.total_mass);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
