//! Cents arithmetic and the doubled-MIDI note names used by the scores.
//!
//! Run with `cargo run --example cents_and_micromidi`.

use intonation::ingest::{cents_to_hz, hz_to_cents, MicroMidi};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let a4 = 440.0;
    println!("octave above A4: {:.3} cents", hz_to_cents(880.0, a4)?);
    println!("one semitone up: {:.3} Hz", cents_to_hz(100.0, a4)?);

    // One micromidi unit is 50 cents, so odd values are quarter-tone notes.
    for v in 110..=114 {
        let note = MicroMidi::new(v)?;
        println!("{v} -> {note}");
    }
    let koron: MicroMidi = "E3-koron".parse()?;
    let g2 = MicroMidi::new(110)?;
    println!("{koron} is {} and sits {} cents above {g2}", koron.value(), koron.cents_from(g2));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
