//! `calflow` command-line tool.

mod commands;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "calflow", version, about = "Optical flow for calcium imaging movies")]
struct Cli {
    /// Worker threads for the flow computation (results do not depend on it).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute flow fields for every frame pair of a movie directory.
    Flow(FlowArgs),
    /// Reliable-vector counts for a list of candidate thresholds.
    MaskSweep(SweepArgs),
    /// Speed histogram inside a region of interest (CSV).
    Hist(HistArgs),
    /// Speed and direction statistics inside a region of interest (CSV).
    Stats(StatsArgs),
    /// Temporal composite: earliest reliable pair per pixel, color coded.
    Composite(CompositeArgs),
    /// Trace particle paths through the flow.
    Trace(TraceArgs),
    /// Normalized vector-kernel matching.
    Match(MatchArgs),
    /// Write a synthetic movie with known motion.
    Synth(SynthArgs),
    /// Rate of intensity change between two frames, as a PPM image.
    Didt(DidtArgs),
    /// Describe a movie directory or a flow file.
    Info(InfoArgs),
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    pub movie: PathBuf,
    /// Odd window width in pixels.
    #[arg(long, conflicts_with = "preset")]
    pub window: Option<usize>,
    /// Parameter preset: rmc1, astrocyte or neuron.
    #[arg(long)]
    pub preset: Option<String>,
    /// Threshold for the reported counts (masking happens at analysis time).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Gaussian pre-smoothing sigma in pixels.
    #[arg(long, default_value_t = 0.0)]
    pub pre_smooth: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also export reliable vectors as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    pub flow: PathBuf,
    /// Ascending thresholds, e.g. 0,1,5,10.
    #[arg(long)]
    pub taus: String,
    /// Directory for sweep.csv and the minimum-eigenvalue images.
    #[arg(long)]
    pub out: PathBuf,
    /// Pairs to render (default: first, middle and last).
    #[arg(long)]
    pub pairs: Option<String>,
}

#[derive(Args, Debug)]
pub struct RoiArgs {
    /// x,y,w,h in pixels (default: the whole frame).
    #[arg(long)]
    pub roi: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HistArgs {
    pub flow: PathBuf,
    #[command(flatten)]
    pub roi: RoiArgs,
    /// Uniform bins over [0, max speed].
    #[arg(long, conflicts_with = "edges")]
    pub bins: Option<usize>,
    /// Explicit ascending bin edges in um/s.
    #[arg(long)]
    pub edges: Option<String>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    pub flow: PathBuf,
    #[command(flatten)]
    pub roi: RoiArgs,
}

#[derive(Args, Debug)]
pub struct CompositeArgs {
    pub flow: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 4)]
    pub stride: usize,
    /// Arrow length per pixel/frame of flow.
    #[arg(long, default_value_t = 2.0)]
    pub gain: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    pub flow: PathBuf,
    /// Seeds as "x1,y1;x2,y2".
    #[arg(long)]
    pub seeds: String,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Write every trace point as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    pub flow: PathBuf,
    /// Kernel stored as a single-pair flow file.
    #[arg(long, conflicts_with_all = ["divergence", "curl"])]
    pub kernel: Option<PathBuf>,
    /// Built-in outward kernel of this odd size.
    #[arg(long, conflicts_with = "curl")]
    pub divergence: Option<usize>,
    /// Built-in rotational kernel of this odd size.
    #[arg(long)]
    pub curl: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Pairs to match (default: all).
    #[arg(long)]
    pub pairs: Option<String>,
    /// Render the map of the first matched pair.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Constant,
    Blob,
    Ramp,
    Wave,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 8)]
    pub frames: usize,
    #[arg(long, default_value_t = 8.0)]
    pub fps: f64,
    /// Microns per pixel.
    #[arg(long, default_value_t = 1.3)]
    pub mpp: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Constant level.
    #[arg(long, default_value_t = 50.0)]
    pub level: f64,
    /// Blob center or wave origin as x,y (default: frame center).
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long, default_value_t = 3.0)]
    pub sigma: f64,
    /// Blob velocity in px/frame as u,v.
    #[arg(long, default_value = "0.5,0", allow_hyphen_values = true)]
    pub velocity: String,
    /// Wavefront speed in px/frame.
    #[arg(long, default_value_t = 0.9)]
    pub speed: f64,
    /// Radial width of the wave annulus.
    #[arg(long, default_value_t = 3.0)]
    pub annulus: f64,
    #[arg(long, default_value_t = 100.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 10.0)]
    pub background: f64,
    /// Ramp coefficients a,b,c of a*x + b*y + c*t.
    #[arg(long, default_value = "2,1,-3", allow_hyphen_values = true)]
    pub ramp: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DidtArgs {
    pub movie: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub pair: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct InfoArgs {
    pub path: PathBuf,
    /// Threshold for the reported reliable counts of a flow file.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    let out = &mut out;
    match cli.command {
        Command::Flow(a) => commands::flow(&a, out),
        Command::MaskSweep(a) => commands::mask_sweep(&a, out),
        Command::Hist(a) => commands::hist(&a, out),
        Command::Stats(a) => commands::stats(&a, out),
        Command::Composite(a) => commands::composite(&a, out),
        Command::Trace(a) => commands::trace(&a, out),
        Command::Match(a) => commands::matching(&a, out),
        Command::Synth(a) => commands::synth(&a, out),
        Command::Didt(a) => commands::didt(&a, out),
        Command::Info(a) => commands::info(&a, out),
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(0) => Err(anyhow::anyhow!("--jobs must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| run(cli))),
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
