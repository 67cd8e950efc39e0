use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "rpss",
    version,
    about = "Random permutation sorting entropy source"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write raw generator bytes to a file or stdout.
    Generate(GenerateArgs),
    /// Report entropy, chi-square and moments of a byte file.
    Analyze(AnalyzeArgs),
    /// Enumerate (N, m) configurations for an output width.
    Plan(PlanArgs),
    /// Compare the composition law against the brute-force series.
    VerifyLaw(VerifyLawArgs),
    /// Dump per-cycle observables and histograms as CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sim,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Table,
    Csv,
}

fn parse_bits(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(b @ (1 | 2 | 4 | 8)) => Ok(b),
        _ => Err(format!("`{s}` is not one of 1, 2, 4, 8")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Array size N.
    #[arg(short = 'N', long, default_value_t = 5)]
    pub array_size: usize,
    /// Sorted outcomes per cycle.
    #[arg(short = 'm', long, default_value_t = 5)]
    pub successes: u32,
}

#[derive(Debug, Clone, Args)]
pub struct JitterArgs {
    /// Named jitter preset.
    #[arg(long, conflicts_with = "jitter_file")]
    pub jitter: Option<String>,
    /// JSON jitter file with `ticks` and `probs` or `counts`.
    #[arg(long)]
    pub jitter_file: Option<PathBuf>,
}

impl JitterArgs {
    pub fn is_set(&self) -> bool {
        self.jitter.is_some() || self.jitter_file.is_some()
    }
}

#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Seed of the shuffle rng.
    #[arg(long)]
    pub engine_seed: Option<u64>,
    /// Seed of the simulated timer (sim mode only).
    #[arg(long)]
    pub timer_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Residue width n; R = 2^n.
    #[arg(short = 'n', long, default_value_t = 8, value_parser = parse_bits)]
    pub bits: u32,
    #[arg(long, value_enum, default_value_t = Mode::Sim)]
    pub mode: Mode,
    #[command(flatten)]
    pub jitter: JitterArgs,
    #[command(flatten)]
    pub seeds: SeedArgs,
    /// Initial feedback state s_0.
    #[arg(long)]
    pub feedback_seed: Option<u64>,
    /// Bytes to emit per stream.
    #[arg(long)]
    pub count: usize,
    /// Output file; stdout when omitted. With --streams, stream i goes to `<output>.i`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Disable feedback reseeding.
    #[arg(long)]
    pub no_reseed: bool,
    /// Emit T mod R instead of N_p mod R.
    #[arg(long)]
    pub probe_time: bool,
    /// Independent pipelines, each written to its own file.
    #[arg(long, default_value_t = 1)]
    pub streams: u32,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Raw byte file.
    pub input: PathBuf,
    /// Symbol width in bits; bytes are split MSB first.
    #[arg(short = 'n', long, default_value_t = 8, value_parser = parse_bits)]
    pub bits: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write `symbol,count` rows here.
    #[arg(long)]
    pub histogram_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(short = 'n', long, default_value_t = 8, value_parser = parse_bits)]
    pub bits: u32,
    /// Keep configurations with rho_N^m below this value.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    #[arg(long, default_value_t = 2)]
    pub min_array_size: usize,
    #[arg(long, default_value_t = 6)]
    pub max_array_size: usize,
    #[arg(long, default_value_t = 1)]
    pub min_successes: u32,
    #[arg(long, default_value_t = 8)]
    pub max_successes: u32,
    #[arg(long, value_enum, default_value_t = TableFormat::Table)]
    pub format: TableFormat,
    /// Append the reference parameter grid with the recomputed column.
    #[arg(long)]
    pub reference: bool,
}

#[derive(Debug, Args)]
pub struct VerifyLawArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Modulus R.
    #[arg(short = 'R', long, default_value_t = 16)]
    pub modulus: u64,
    #[command(flatten)]
    pub jitter: JitterArgs,
    /// Tail mass left out of the brute-force series.
    #[arg(long, default_value_t = 1e-12)]
    pub tail_eps: f64,
    /// Also simulate this many cycles and compare residue frequencies.
    #[arg(long)]
    pub monte_carlo: Option<u64>,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(short = 'R', long, default_value_t = 16)]
    pub modulus: u64,
    #[command(flatten)]
    pub jitter: JitterArgs,
    #[command(flatten)]
    pub seeds: SeedArgs,
    #[arg(long)]
    pub cycles: u64,
    /// Directory for the CSV files.
    #[arg(long)]
    pub output_dir: PathBuf,
    /// Record per-trial tick deltas into `trial_ticks.csv`.
    #[arg(long)]
    pub trace: bool,
    /// Deltas at or above this many ticks are excluded from `trial_ticks.csv`.
    #[arg(long, default_value_t = 500)]
    pub too_big: u64,
}
