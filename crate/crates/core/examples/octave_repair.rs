//! Repairs a pitch tracker's octave jump, automatically and from a manual
//! correction file.

use intonation::ingest::{
    correct_octave_errors, parse_f0_csv, parse_octave_spans, AutoOctaveConfig, F0CsvOptions, OctavePolicy,
};

fn trace() -> String {
    let mut csv = String::from("time,frequency\n");
    for k in 0..60 {
        // frames 20..40 were tracked an octave high
        let f = if (20..40).contains(&k) { 392.0 } else { 196.0 };
        csv.push_str(&format!("{:.3},{f}\n", k as f64 * 0.01));
    }
    csv
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let series = parse_f0_csv(&trace(), &F0CsvOptions { ref_hz: Some(196.0), ..Default::default() })?;
    let show = |label: &str, s: &intonation::ingest::PitchSeries| {
        let max = s.voiced_cents().into_iter().fold(f64::MIN, f64::max);
        println!("{label}: highest frame at {max:.1} cents");
    };
    show("raw", &series);

    let auto = correct_octave_errors(&series, &OctavePolicy::Automatic(AutoOctaveConfig::default()))?;
    show("automatic", &auto);

    let spans = parse_octave_spans("start,end,shift\n0.195,0.395,-1\n")?;
    let manual = correct_octave_errors(&series, &OctavePolicy::Manual(spans))?;
    show("manual", &manual);
    assert_eq!(auto, manual);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
