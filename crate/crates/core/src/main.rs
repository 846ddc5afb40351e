use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};

use actiongraph::error::{Error, Result};
use actiongraph::io::{
    read_records, write_record, write_records, FollowRecord, FrameReader, NdjsonReader,
    TrackRecord, TruthRecord,
};
use actiongraph::metrics::{eval_follow, eval_tracking};
use actiongraph::pipeline::{build_model, follow_stream, track_stream, Pacer, ThetaChoice};
use actiongraph::sim::{simulate, ScenarioKind, ScenarioSpec};
use actiongraph::{Execution, MappingConfig, Oracle, TrackerConfig};

#[derive(Parser)]
#[command(
    name = "actiongraph",
    version,
    about = "Marker tracking and online gesture following"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign stable blob ids to a marker-frame stream.
    Track(TrackArgs),
    /// Build an oracle model from tracker output.
    Build(BuildArgs),
    /// Follow tracker output through a stored model.
    Follow(FollowArgs),
    /// Generate a synthetic scenario.
    Simulate(SimulateArgs),
    /// Score tracker or follower output against ground truth.
    Eval(EvalArgs),
    /// List repeated stretches (candidate gestures) in a model.
    Segments(SegmentsArgs),
}

#[derive(Args)]
struct Pacing {
    /// Pace output at the frame rate instead of running flat out.
    #[arg(long)]
    realtime: bool,
    #[arg(long, default_value_t = 30.0)]
    rate: f64,
}

impl Pacing {
    fn pacer(&self) -> Result<Option<Pacer>> {
        self.realtime.then(|| Pacer::new(self.rate)).transpose()
    }
}

#[derive(Args)]
struct TrackArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    max_blobs: usize,
    #[arg(long, default_value_t = 10.0)]
    birth_cost: f64,
    #[arg(long, default_value_t = 0.9)]
    bias: f64,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    pacing: Pacing,
}

#[derive(Args)]
#[command(group(ArgGroup::new("threshold").required(true).args(["theta", "theta_sweep"])))]
struct BuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    theta: Option<f64>,
    /// Comma-separated candidate thresholds.
    #[arg(long)]
    theta_sweep: Option<String>,
    /// Blob slots in the feature layout (default: every id seen alive).
    #[arg(long)]
    layout: Option<usize>,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct FollowArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    mapping: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    pacing: Pacing,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    kind: String,
    #[arg(long)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30.0)]
    rate: f64,
    #[arg(long)]
    markers: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    /// Occlusion window as "start,end".
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    clutter: Option<usize>,
    #[arg(long)]
    jitter: Option<f64>,
    #[arg(long)]
    reappear_radius: Option<f64>,
    #[arg(long)]
    gestures: Option<usize>,
    #[arg(long)]
    gesture: Option<usize>,
    #[arg(long)]
    repeat: Option<usize>,
    #[arg(long)]
    warp: Option<f64>,
    #[arg(long)]
    stretch: Option<f64>,
    #[arg(long)]
    noise_level: Option<f64>,
    #[arg(long)]
    shape_seed: Option<u64>,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    /// Tracker or follower output to score.
    #[arg(long)]
    output: PathBuf,
    /// Ground truth of the stream the model was built from; follower states
    /// are then scored by the reference time they stand for.
    #[arg(long)]
    recording: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 2)]
    min_len: usize,
}

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(f)))
}

fn create(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout())));
    }
    let f = File::create(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    Ok(Box::new(BufWriter::new(f)))
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s)?;
    Ok(s)
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("bad number {x:?}: {e}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Track(a) => {
            let config = TrackerConfig {
                max_blobs: a.max_blobs,
                birth_cost: a.birth_cost,
                continuity_bias: a.bias,
            };
            let mut out = create(&a.output)?;
            track_stream(
                FrameReader::new(open(&a.input)?),
                config,
                &mut out,
                a.pacing.pacer()?.as_mut(),
            )?;
        }
        Command::Build(a) => {
            let records: Vec<TrackRecord> = read_records(open(&a.input)?)?;
            let theta = match (a.theta, &a.theta_sweep) {
                (Some(t), _) => ThetaChoice::Fixed(t),
                (None, Some(s)) => ThetaChoice::Sweep(parse_list(s)?),
                (None, None) => unreachable!("clap enforces one threshold option"),
            };
            let (oracle, selection) = build_model(&records, &theta, a.layout, exec(a.sequential))?;
            let mut out = create(&a.model)?;
            writeln!(out, "{}", oracle.to_json())?;
            out.flush()?;
            if let Some(sel) = selection {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                write_record(&mut w, &sel)?;
            }
        }
        Command::Follow(a) => {
            let oracle = Oracle::from_json(&read_to_string(&a.model)?)?;
            let mapping = match &a.mapping {
                Some(p) => MappingConfig::from_json(&read_to_string(p)?)?,
                None => MappingConfig::default(),
            };
            let mut out = create(&a.output)?;
            follow_stream(
                &oracle,
                NdjsonReader::<_, TrackRecord>::new(open(&a.input)?),
                &mapping,
                &mut out,
                exec(a.sequential),
                a.pacing.pacer()?.as_mut(),
            )?;
        }
        Command::Simulate(a) => {
            let kind: ScenarioKind = a.kind.parse()?;
            let mut spec = ScenarioSpec::new(kind, a.frames).with_seed(a.seed);
            spec.rate = a.rate;
            spec.markers = a.markers;
            if let Some(w) = &a.window {
                let v = parse_list(w)?;
                if v.len() != 2 || v.iter().any(|x| *x < 0.0 || x.fract() != 0.0) {
                    return Err(Error::Input(format!(
                        "window must be \"start,end\", got {w:?}"
                    )));
                }
                spec.window = (v[0] as usize, v[1] as usize);
            }
            macro_rules! set {
                ($($f:ident),*) => { $( if let Some(v) = a.$f { spec.$f = v; } )* };
            }
            set!(
                hidden,
                clutter,
                jitter,
                reappear_radius,
                gestures,
                gesture,
                repeat,
                warp,
                stretch,
                noise_level,
                shape_seed
            );
            let scenario = simulate(&spec)?;
            let mut out = create(&a.output)?;
            write_records(&mut out, &scenario.frames)?;
            out.flush()?;
            if let Some(p) = &a.truth {
                let mut t = create(p)?;
                write_records(&mut t, &scenario.truth)?;
                t.flush()?;
            }
        }
        Command::Eval(a) => {
            let truth: Vec<TruthRecord> = read_records(open(&a.truth)?)?;
            let raw: Vec<serde_json::Value> = read_records(open(&a.output)?)?;
            let is_follow = raw.first().is_some_and(|v| v.get("best").is_some());
            let metrics = if is_follow {
                let recs = raw
                    .into_iter()
                    .map(serde_json::from_value::<FollowRecord>)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Input(e.to_string()))?;
                let recording: Option<Vec<TruthRecord>> = a
                    .recording
                    .as_ref()
                    .map(|p| read_records(open(p)?))
                    .transpose()?;
                eval_follow(&recs, &truth, recording.as_deref())?
            } else {
                let recs = raw
                    .into_iter()
                    .map(serde_json::from_value::<TrackRecord>)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Input(e.to_string()))?;
                eval_tracking(&recs, &truth)?
            };
            let stdout = io::stdout();
            let mut w = stdout.lock();
            serde_json::to_writer_pretty(&mut w, &metrics).map_err(io::Error::from)?;
            writeln!(w)?;
        }
        Command::Segments(a) => {
            let oracle = Oracle::from_json(&read_to_string(&a.model)?)?;
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_records(&mut w, &oracle.repeated_segments(a.min_len))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("actiongraph: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
