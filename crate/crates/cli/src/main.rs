mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "tep", version, about = "Transmission expansion planning with angle and cycle formulations")]
pub struct Cli {
    /// Seed for instance generation.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Parallel benchmark jobs.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: log::LevelFilter,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated instance or a named fixture to disk.
    Generate(GenerateArgs),
    /// Build and solve one or both formulations.
    Solve(SolveArgs),
    /// Write a formulation as an LP or MPS file.
    Export(ExportArgs),
    /// Enumerate every build assignment and check big-M validity and equivalence.
    Verify(VerifyArgs),
    /// Time both formulations over a set of instances.
    Benchmark(BenchmarkArgs),
    /// List every big-M value with the rule that produced it.
    BigmReport(BigmReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormulationChoice {
    Angle,
    Cycle,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SingleFormulation {
    Angle,
    Cycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NetFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Lp,
    Mps,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Output directory (csv) or file (json).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = NetFormat::Csv)]
    pub format: NetFormat,
    /// Write this fixture instead of a generated instance.
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long, default_value_t = 6)]
    pub buses: usize,
    #[arg(long, default_value_t = 1.3)]
    pub mesh_degree: f64,
    #[arg(long, default_value_t = 1)]
    pub zones: usize,
    #[arg(long, default_value_t = 2)]
    pub corridors: usize,
    #[arg(long, default_value_t = 1)]
    pub per_corridor: usize,
    #[arg(long, default_value_t = 1)]
    pub snapshots: usize,
    #[arg(long, default_value_t = 0.4)]
    pub renewable_share: f64,
    /// Emission budget as a fraction of the all-peaker emissions.
    #[arg(long)]
    pub co2_fraction: Option<f64>,
    /// Close a cycle among the zones with candidate corridors.
    #[arg(long)]
    pub zone_cycle: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Network directory, network.json file, or `fixture:<name>`.
    pub network: String,
    /// Multiply every computed big-M by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub bigm_scale: f64,
    /// Replace one big-M, as `kind:key=value` with kind kvl, slack or cycle.
    #[arg(long = "bigm-override", value_name = "KIND:KEY=VALUE")]
    pub bigm_override: Vec<String>,
    /// Drop the emission budget row.
    #[arg(long)]
    pub no_co2: bool,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = FormulationChoice::Cycle)]
    pub formulation: FormulationChoice,
    #[arg(long, default_value_t = 0.005)]
    pub mip_gap: f64,
    /// Seconds per formulation.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Result JSON path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the zone graph and candidate cycles as text.
    #[arg(long)]
    pub dump_graph: Option<PathBuf>,
    /// Print the flow table to stderr.
    #[arg(long)]
    pub table: bool,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = SingleFormulation::Cycle)]
    pub formulation: SingleFormulation,
    #[arg(long, value_enum, default_value_t = ExportFormat::Lp)]
    pub format: ExportFormat,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 20)]
    pub max_binaries: usize,
    /// Additionally halve each big-M in turn and report which halvings are caught.
    #[arg(long)]
    pub negative_control: bool,
    /// Report JSON path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    /// Spec matrix JSON. Without it, `--suite` generated instances are used.
    pub matrix: Option<PathBuf>,
    /// Number of generated instances when no matrix is given.
    #[arg(long)]
    pub suite: Option<usize>,
    /// CSV output path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0.005)]
    pub mip_gap: f64,
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BigmReportArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// CSV output path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().filter_level(cli.log_level).init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
