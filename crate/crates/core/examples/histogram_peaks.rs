//! Pitch histogram of one synthetic piece, its peaks and their shape types.

use intonation::histogram::{detect_peaks, HistogramConfig};
use intonation::synthkit::{generate_piece, GroundTruth, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig { pieces: 1, offset_range: 0.0, seed: 11, ..SynthConfig::default() };
    let gt = GroundTruth::from_config(&cfg)?;
    let piece = generate_piece(&gt, 0)?;
    let analysis = detect_peaks(&piece.series, &HistogramConfig::default())?;

    println!("{} voiced frames, {} peaks", piece.series.voiced_count(), analysis.peaks.len());
    println!("{:>9} {:>9} {:>7} {:>6}  type", "true", "found", "width", "mass");
    for (peak, truth) in analysis.peaks.iter().zip(&gt.tuning) {
        println!(
            "{truth:>9.1} {:>9.1} {:>7.1} {:>5.1}%  {}",
            peak.center,
            peak.range.width(),
            100.0 * peak.mass_fraction,
            peak.peak_type
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
