//! `legibility`: simulate cue runs, render them, analyze survey responses.
//!
//! Exit codes: 0 success, 2 usage, 3 invalid input, 4 runtime failure.

mod analyze;
mod render;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use legibility_core::cues::{CueMode, CueType};

#[derive(Parser)]
#[command(name = "legibility", version, about = "Motion legibility cue simulator and study analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario with one cue condition and write its trace.
    Simulate(SimulateArgs),
    /// Draw a trace as frames or GIF, or a report as a chart.
    Render(RenderArgs),
    /// Run the statistical pipeline on responses (or synthetic data).
    Analyze(AnalyzeArgs),
    /// Write the built-in scenarios as editable files.
    Scenarios {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Built-in name (turn, straight) or path to a scenario file.
    #[arg(long)]
    pub scenario: String,
    /// arrows, lights or none.
    #[arg(long)]
    pub cue: CueType,
    /// path, goal or pathgoal; required unless --cue none.
    #[arg(long)]
    pub mode: Option<CueMode>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replan every N ticks instead of once per leg.
    #[arg(long)]
    pub replan_every: Option<u32>,
    /// Goal-mode flash speeds up on approach instead of slowing down.
    #[arg(long)]
    pub invert_goal_frequency: bool,
    #[arg(long, default_value_t = 20_000)]
    pub max_ticks: u64,
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long, conflicts_with = "report", required_unless_present = "report")]
    pub trace: Option<PathBuf>,
    /// Scenario of the trace; defaults to the built-in named in its header.
    #[arg(long, requires = "trace")]
    pub scenario: Option<String>,
    #[arg(long, default_value = "frames", requires = "trace")]
    pub format: String,
    #[arg(long)]
    pub style: Option<PathBuf>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// sas (means with CIs) or comprehension (quartile boxes).
    #[arg(long, default_value = "sas", requires = "report")]
    pub chart: String,
    /// Output directory for traces, output file for charts.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    pub responses: Option<PathBuf>,
    /// Generate responses with the built-in effect preset.
    #[arg(long)]
    pub synth: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 229)]
    pub participants: usize,
    /// Participants given a failed attention check (synthetic data only).
    #[arg(long, default_value_t = 0)]
    pub failures: usize,
    /// Corrected significance threshold.
    #[arg(long, default_value_t = 0.025)]
    pub alpha: f64,
    /// Also save the synthetic responses as CSV.
    #[arg(long, requires = "synth")]
    pub write_responses: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub enum Failure {
    Usage(String),
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Invalid(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }
}

pub type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Simulate(args) => simulate::run(&args),
        Command::Render(args) => render::run(&args),
        Command::Analyze(args) => analyze::run(&args),
        Command::Scenarios { out } => simulate::export_scenarios(&out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Invalid(e) => eprintln!("invalid input: {e:#}"),
                Failure::Runtime(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
