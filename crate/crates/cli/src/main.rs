use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use symtrack::harness::{evaluate, load_manifest, run_grid, ParamGrid, Piece};
use symtrack::ingest::{alignment_to_tsv, load_performance, load_score, performance_to_tsv, score_to_tsv};
use symtrack::stream_sim::{random_score, replay, synthesize, Pacing, SynthParams, TempoCurve};
use symtrack::{Error, MatchEvent, ScoreSequence, Tracker, TrackerConfig};

#[derive(Parser)]
#[command(name = "symtrack", version, about = "Real-time symbolic score following")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track one performance against a score and write JSON-lines match events.
    Track {
        #[arg(long)]
        score: PathBuf,
        #[arg(long)]
        perf: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Pace the input by its own inter-onset gaps.
        #[arg(long)]
        realtime: bool,
        /// Add an `extrapolated_beats` field predicted this far ahead.
        #[arg(long)]
        lookahead_ms: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every piece of a manifest and write a JSON report.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a parameter grid; writes a TSV table and a JSON twin.
    Grid {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Base configuration for parameters not on the grid.
        #[arg(long)]
        config: Option<PathBuf>,
        /// TSV output; the JSON goes next to it with a `.json` extension.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a score as a synthetic performance plus its ground truth.
    Synth {
        #[arg(long)]
        score: PathBuf,
        /// `0.5` for a constant tempo or `beat:spq,beat:spq,...`.
        #[arg(long, default_value = "0.5")]
        tempo_curve: String,
        #[arg(long, default_value_t = 0.0)]
        jitter_ms: f64,
        #[arg(long, default_value_t = 0.0)]
        chord_spread_ms: f64,
        #[arg(long, default_value_t = 0.0)]
        insert_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        delete_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_perf: PathBuf,
        #[arg(long)]
        out_align: PathBuf,
    },
    /// Write a random piano-like score as TSV.
    GenScore {
        #[arg(long, default_value_t = 300)]
        onsets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::EmptyScore => 2,
        Error::SessionEnded => 3,
        _ => 1,
    }
}

fn load_config(path: Option<&Path>) -> Result<TrackerConfig, Error> {
    path.map_or_else(|| Ok(TrackerConfig::default()), TrackerConfig::load)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

#[derive(Serialize)]
struct MatchRecord {
    perf_index: usize,
    score_index: usize,
    perf_onset_s: f64,
    score_beats: f64,
    tempo_spq: f64,
    wallclock_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    extrapolated_beats: Option<f64>,
}

struct EventWriter<'a> {
    out: BufWriter<File>,
    path: &'a Path,
    score: &'a ScoreSequence,
    lookahead_s: Option<f64>,
    start: Instant,
}

impl EventWriter<'_> {
    fn write(&mut self, ev: &MatchEvent, tracker: &Tracker<'_>) -> Result<(), Error> {
        let record = MatchRecord {
            perf_index: ev.perf_index,
            score_index: ev.score_index,
            perf_onset_s: ev.perf_onset_s,
            score_beats: self.score[ev.score_index].onset_b(),
            tempo_spq: ev.tempo.spq(),
            wallclock_s: self.start.elapsed().as_secs_f64(),
            extrapolated_beats: self
                .lookahead_s
                .map(|s| tracker.extrapolate_position(s))
                .transpose()?,
        };
        let line = serde_json::to_string(&record).expect("record serializes");
        writeln!(self.out, "{line}").map_err(|e| io_error(self.path, e))
    }
}

fn cmd_track(
    score: &Path,
    perf: &Path,
    config: Option<&Path>,
    realtime: bool,
    lookahead_ms: Option<f64>,
    out: &Path,
) -> Result<(), Error> {
    let cfg = load_config(config)?;
    let score = load_score(score)?;
    let perf = load_performance(perf)?;
    let mut tracker = Tracker::new(&score, cfg)?;
    let mut writer = EventWriter {
        out: create(out)?,
        path: out,
        score: &score,
        lookahead_s: lookahead_ms.map(|ms| ms / 1000.0),
        start: Instant::now(),
    };

    let result = if realtime {
        let (tx, rx) = mpsc::sync_channel(64);
        std::thread::scope(|scope| {
            let feed = &perf;
            scope.spawn(move || {
                let mut tx = tx;
                // A closed sink only means tracking stopped early.
                let _ = replay(feed, Pacing::Realtime, &mut tx);
            });
            let result = rx.iter().try_for_each(|note| {
                let ev = tracker.step(note)?;
                writer.write(&ev, &tracker)
            });
            drop(rx);
            result
        })
    } else {
        perf.notes().iter().try_for_each(|note| {
            let ev = tracker.step(*note)?;
            writer.write(&ev, &tracker)
        })
    };
    writer.out.flush().map_err(|e| io_error(out, e))?;
    result
}

fn load_pieces(manifest: &Path) -> Result<Vec<Piece>, Error> {
    Ok(load_manifest(manifest)?.iter().map(Piece::load).collect())
}

fn cmd_eval(manifest: &Path, config: Option<&Path>, out: &Path) -> Result<(), Error> {
    let cfg = load_config(config)?;
    let pieces = load_pieces(manifest)?;
    let report = evaluate(&pieces, &cfg);
    let json = serde_json::to_vec_pretty(&report).expect("report serializes");
    write_file(out, &json)
}

fn cmd_grid(manifest: &Path, grid: &Path, config: Option<&Path>, out: &Path) -> Result<(), Error> {
    let base = load_config(config)?;
    let grid = ParamGrid::load(grid)?;
    // Fail on bad axes before loading any piece.
    grid.configs(&base)?;
    let pieces = load_pieces(manifest)?;
    let report = run_grid(&pieces, &grid, &base)?;
    write_file(out, report.to_tsv().as_bytes())?;
    let json = serde_json::to_vec_pretty(&report).expect("report serializes");
    write_file(&out.with_extension("json"), &json)
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    score: &Path,
    tempo_curve: &str,
    jitter_ms: f64,
    chord_spread_ms: f64,
    insert_rate: f64,
    delete_rate: f64,
    seed: u64,
    out_perf: &Path,
    out_align: &Path,
) -> Result<(), Error> {
    for rate in [insert_rate, delete_rate] {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Usage(format!("rate {rate} outside [0, 1]")));
        }
    }
    let score = load_score(score)?;
    let params = SynthParams {
        tempo_curve: TempoCurve::parse(tempo_curve)?,
        jitter_sd_s: jitter_ms / 1000.0,
        chord_spread_sd_s: chord_spread_ms / 1000.0,
        insert_rate,
        delete_rate,
        seed,
    };
    let (perf, gt) = synthesize(&score, &params)?;
    write_file(out_perf, performance_to_tsv(&perf).as_bytes())?;
    write_file(out_align, alignment_to_tsv(&gt).as_bytes())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Track {
            score,
            perf,
            config,
            realtime,
            lookahead_ms,
            out,
        } => cmd_track(&score, &perf, config.as_deref(), realtime, lookahead_ms, &out),
        Command::Eval { manifest, config, out } => cmd_eval(&manifest, config.as_deref(), &out),
        Command::Grid {
            manifest,
            grid,
            config,
            out,
        } => cmd_grid(&manifest, &grid, config.as_deref(), &out),
        Command::Synth {
            score,
            tempo_curve,
            jitter_ms,
            chord_spread_ms,
            insert_rate,
            delete_rate,
            seed,
            out_perf,
            out_align,
        } => cmd_synth(
            &score,
            &tempo_curve,
            jitter_ms,
            chord_spread_ms,
            insert_rate,
            delete_rate,
            seed,
            &out_perf,
            &out_align,
        ),
        Command::GenScore { onsets, seed, out } => {
            if onsets == 0 {
                return Err(Error::Usage("--onsets must be > 0".into()));
            }
            write_file(&out, score_to_tsv(&random_score(onsets, seed)?).as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("symtrack: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
