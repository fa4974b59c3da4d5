//! The `intonation` command line.
//!
//! Exit codes: 0 on success, 2 for usage, configuration or input problems,
//! 1 for anything else.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::export::{alignment_csv, peaks_json, to_json};
use crate::pipeline::{analyse_all, tune, PieceAnalysis};
use crate::synthkit::{write_corpus, GroundTruth};
use crate::{svg, Error, Result};

#[derive(Debug, Parser)]
#[command(name = "intonation", version, about = "Pitch histograms, score alignment and repertoire tuning from F0 traces")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for per-piece stages (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Seed; overrides the config's `seed` (and `synth.seed` for `synth`).
    #[arg(long)]
    seed: Option<u64>,
    /// Skip SVG plots.
    #[arg(long)]
    no_svg: bool,
    /// Extra F0 CSV files, added to the configured inputs.
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Histogram and peaks for each piece.
    Histogram(Common),
    /// Align each piece to its score and write per-note histograms.
    Align(Common),
    /// Derive the repertoire tuning across all pieces.
    Tune {
        #[command(flatten)]
        common: Common,
        /// Maximum optimizer sweeps; overrides `tuning.max_sweeps`.
        #[arg(long)]
        iterations: Option<usize>,
        /// Consecutive rejected trials before stopping; overrides `tuning.patience`.
        #[arg(long)]
        patience: Option<usize>,
    },
    /// Write a synthetic corpus with its ground truth.
    Synth(Common),
}

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_target(false)
        .try_init();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    let (common, iterations, patience) = match command {
        Command::Histogram(c) => return with_pool(&c, cmd_histogram),
        Command::Align(c) => return with_pool(&c, cmd_align),
        Command::Synth(c) => return with_pool(&c, cmd_synth),
        Command::Tune { common, iterations, patience } => (common, iterations, patience),
    };
    with_pool(&common, |c, mut cfg| {
        if let Some(n) = iterations {
            cfg.tuning.max_sweeps = n;
        }
        if patience.is_some() {
            cfg.tuning.patience = patience;
        }
        cfg.validate()?;
        cmd_tune(c, cfg)
    })
}

fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.input.f0.extend(c.inputs.iter().cloned());
    if let Some(seed) = c.seed {
        cfg.seed = Some(seed);
        cfg.synth.seed = seed;
    }
    Ok(cfg)
}

fn with_pool(c: &Common, f: impl FnOnce(&Common, RunConfig) -> Result<()> + Send) -> Result<()> {
    let cfg = load_config(c)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.jobs)
        .build()
        .map_err(|e| Error::Io {
            path: PathBuf::from("<thread pool>"),
            source: std::io::Error::other(e),
        })?;
    pool.install(|| f(c, cfg))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    std::fs::write(path, contents).map_err(Error::io(path))
}

fn write_run_manifest(out: &Path, cfg: &RunConfig) -> Result<()> {
    write(&out.join("run.json"), &to_json(cfg))
}

fn analyse(cfg: &RunConfig) -> Result<Vec<PieceAnalysis>> {
    let pieces = cfg.pieces()?;
    log::info!("analysing {} pieces", pieces.len());
    analyse_all(&pieces, cfg)
}

fn cmd_histogram(c: &Common, cfg: RunConfig) -> Result<()> {
    let analysed = analyse(&cfg)?;
    for a in &analysed {
        let dir = c.out.join(&a.id);
        write(&dir.join("histogram.csv"), &a.histogram.histogram.to_csv())?;
        write(&dir.join("peaks.json"), &peaks_json(&a.peaks))?;
        if !c.no_svg {
            write(&dir.join("histogram.svg"), &svg::histogram_svg(&a.id, &a.histogram, &a.peaks))?;
        }
    }
    write_run_manifest(&c.out, &cfg)
}

fn cmd_align(c: &Common, cfg: RunConfig) -> Result<()> {
    let analysed = analyse(&cfg)?;
    for a in &analysed {
        let (Some(score), Some(al)) = (&a.score, &a.alignment) else {
            eprintln!("{}: score absent, skipping alignment", a.id);
            continue;
        };
        let dir = c.out.join(&a.id);
        write(&dir.join("alignment.csv"), &alignment_csv(&a.series, &al.path, score))?;
        for (note, h) in &al.notes.per_note {
            write(&dir.join("notes").join(format!("{}.csv", note.value())), &h.to_csv())?;
        }
        write(&dir.join("peaks.json"), &peaks_json(&a.peaks))?;
        if !c.no_svg {
            write(&dir.join("alignment.svg"), &svg::alignment_svg(&a.id, &a.series, &al.path, &al.expected))?;
        }
    }
    write_run_manifest(&c.out, &cfg)
}

fn cmd_tune(c: &Common, cfg: RunConfig) -> Result<()> {
    let analysed = analyse(&cfg)?;
    let out = tune(&analysed, &cfg)?;
    log::info!(
        "{} trials, {} accepted, cost {:.3} -> {:.3}",
        out.optimized.trials,
        out.optimized.accepted,
        out.optimized.trace.initial().unwrap_or(0.0),
        out.optimized.final_cost()
    );
    write(&c.out.join("matrix.csv"), &out.matrix.to_csv())?;
    write(&c.out.join("cost_trace.csv"), &out.optimized.trace.to_csv())?;
    write(&c.out.join("tuning.json"), &(out.tuning.to_json() + "\n"))?;
    if !c.no_svg {
        write(&c.out.join("peaks.svg"), &svg::matrix_svg("All observed peaks", &out.matrix))?;
        write(&c.out.join("cost.svg"), &svg::cost_svg("Cost per step", &out.optimized.trace))?;
        write(&c.out.join("tuning.svg"), &svg::tuning_svg("Derived tuning", &out.tuning))?;
    }
    write_run_manifest(&c.out, &cfg)
}

fn cmd_synth(c: &Common, cfg: RunConfig) -> Result<()> {
    let gt = GroundTruth::from_config(&cfg.synth)?;
    let paths = write_corpus(&gt, &c.out)?;
    log::info!("wrote {} files to {}", paths.len(), c.out.display());
    Ok(())
}
