mod alloc;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stpm::io::{Mode, RunConfig};
use stpm::Threshold;

#[global_allocator]
static GLOBAL: alloc::Tracking = alloc::Tracking;

#[derive(Parser)]
#[command(
    name = "stpm",
    version,
    about = "Mine frequent seasonal temporal patterns from time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine patterns from a CSV file.
    Mine(MineArgs),
    /// Generate a synthetic CSV with planted patterns.
    Gen(commands::GenArgs),
    /// Compare the miner against the brute-force oracle on random databases.
    OracleDiff(commands::OracleDiffArgs),
    /// Time the exact and approximate miners on one input.
    Bench(BenchArgs),
    /// Build and dump the correlation graph.
    Graph(GraphArgs),
}

/// Settings shared by every command that reads a run configuration.
/// Flags override values from the config file.
#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Input CSV (timestamp column followed by one column per series).
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Fine positions per granule.
    #[arg(short = 'm', long)]
    factor_m: Option<u32>,
    /// Absolute count `K` or percentage `K%` of granules.
    #[arg(long)]
    max_period: Option<Threshold>,
    /// Absolute count `K` or percentage `K%` of granules.
    #[arg(long)]
    min_density: Option<Threshold>,
    #[arg(long)]
    dist_min: Option<u32>,
    #[arg(long)]
    dist_max: Option<u32>,
    #[arg(long)]
    min_season: Option<u32>,
    #[arg(long)]
    epsilon: Option<u32>,
    #[arg(long)]
    min_overlap: Option<u32>,
    #[arg(short, long)]
    k_max: Option<usize>,
    #[arg(long)]
    no_apriori: bool,
    #[arg(long)]
    no_transitivity: bool,
    /// Worker threads for the miner; 1 gives the deterministic reference run.
    #[arg(short = 'T', long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    pub fn config(&self, mode: Option<Mode>) -> anyhow::Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let mut flags = RunConfig {
            input: self.input.clone(),
            mode,
            k_max: self.k_max,
            threads: self.threads,
            seed: self.seed,
            ..Default::default()
        };
        flags.granularity.factor_m = self.factor_m;
        flags.season.max_period = self.max_period;
        flags.season.min_density = self.min_density;
        flags.season.dist_min = self.dist_min;
        flags.season.dist_max = self.dist_max;
        flags.season.min_season = self.min_season;
        flags.relation.epsilon = self.epsilon;
        flags.relation.min_overlap = self.min_overlap;
        flags.pruning.apriori = self.no_apriori.then_some(false);
        flags.pruning.transitivity = self.no_transitivity.then_some(false);
        Ok(base.overlay(&flags))
    }
}

#[derive(Args)]
pub struct MineArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    mode: Option<Mode>,
    /// Patterns JSON; stdout when neither this nor the config names a file.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Run manifest JSON.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Correlation graph JSON.
    #[arg(long)]
    dump_graph: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "exact,approx")]
    modes: Vec<Mode>,
    #[arg(long, default_value_t = 3)]
    repeat: usize,
    /// Also write the results as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
pub struct GraphArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Graph JSON; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Mine(a) => commands::mine(a),
        Command::Gen(a) => commands::gen(a),
        Command::OracleDiff(a) => commands::oracle_diff(a),
        Command::Bench(a) => commands::bench(a),
        Command::Graph(a) => commands::graph(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
