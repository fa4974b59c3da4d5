//! Derives a tuning from a small synthetic repertoire whose pieces are each
//! sung at a different pitch, with one degree that wanders from piece to
//! piece.

use intonation::config::RunConfig;
use intonation::pipeline::{analyse_piece, tune, PieceInput};
use intonation::synthkit::{generate_piece, FluidDegree, GroundTruth, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SynthConfig {
        pieces: 8,
        seed: 21,
        fluid: vec![FluidDegree { degree: 1, lo: 120.0, hi: 180.0 }],
        ..SynthConfig::default()
    };
    let gt = GroundTruth::from_config(&cfg)?;
    let run = RunConfig::default();
    let mut analysed = Vec::new();
    for i in 0..gt.piece_count() {
        let piece = generate_piece(&gt, i)?;
        let input = PieceInput { id: gt.piece_ids[i].clone(), series: piece.series, score: None, octave_spans: None };
        analysed.push(analyse_piece(&input, &run)?);
    }
    let out = tune(&analysed, &run)?;
    println!(
        "cost {:.1} -> {:.1} after {} trials",
        out.optimized.trace.initial().unwrap_or(0.0),
        out.optimized.final_cost(),
        out.optimized.trials
    );
    println!("{:>6} {:>8} {:>7} {:>5}", "truth", "mean", "sd", "fluid");
    for (d, truth) in out.tuning.degrees.iter().zip(&gt.tuning) {
        println!("{truth:>6.0} {:>8.1} {:>7.1} {:>5}", d.mean_cents, d.stdev_cents, d.fluid);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
