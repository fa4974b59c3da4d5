//! Writes a synthetic corpus (F0 CSVs, note tables, ground-truth manifest)
//! the command-line tools can read.

use intonation::synthkit::{write_corpus, GroundTruth, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("intonation-corpus-{}", std::process::id()));
    let gt = GroundTruth::from_config(&SynthConfig { pieces: 3, seed: 5, ..SynthConfig::default() })?;
    let paths = write_corpus(&gt, &dir)?;
    for p in &paths {
        println!("{} ({} bytes)", p.display(), std::fs::metadata(p)?.len());
    }
    println!("try: intonation tune --out /tmp/tuned {}", dir.join("*.f0.csv").display());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
