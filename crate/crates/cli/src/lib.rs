//! Command-line front end for `netcascade`.
//!
//! Every subcommand is a plain function over parsed arguments so tests can
//! drive it in-process.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netcascade::infmax::{Algorithm, InfmaxError};
use netcascade::influence::InfluenceError;
use netcascade::ingest::IngestError;
use netcascade::metrics::MetricsError;
use netcascade::network::NetworkError;
use netcascade::scenarios::{ScenarioError, ShockHeuristic};
use thiserror::Error;

pub use commands::{
    cmd_build, cmd_gadget, cmd_gen_fixture, cmd_intervene, cmd_maxshock, cmd_solve, cmd_stress, load_network,
};

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<InfluenceError> for CliError {
    fn from(e: InfluenceError) -> Self {
        match e {
            InfluenceError::Network(e) => e.into(),
            InfluenceError::EmptyFailedSet => CliError::Infeasible(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<InfmaxError> for CliError {
    fn from(e: InfmaxError) -> Self {
        match e {
            InfmaxError::Influence(e) => e.into(),
            InfmaxError::InstanceTooLarge(_) => CliError::Infeasible(e.to_string()),
            InfmaxError::NegativePayment { .. } | InfmaxError::NonMonotoneCascade { .. } => {
                CliError::Internal(e.to_string())
            }
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Network(e) => e.into(),
            ScenarioError::BudgetExceeded { .. } | ScenarioError::Infeasible(_) => CliError::Infeasible(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::Scenario { source, .. } => (*source).into(),
            MetricsError::Empty => CliError::Infeasible(e.to_string()),
            MetricsError::Network(e) => e.into(),
            MetricsError::Influence(e) => e.into(),
            MetricsError::Infmax(e) => e.into(),
            MetricsError::Shock(e) => e.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "netcascade", version, about = "Default cascades and optimal interventions on cross-holding networks")]
pub struct Cli {
    /// Worker threads; results do not depend on it
    #[arg(long, global = true, env = "NETCASCADE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a network JSON from an input-output table
    Build(BuildArgs),
    /// Solve for the best- or worst-case equilibrium
    Solve(SolveArgs),
    /// Plan and apply an intervention after a shock
    Intervene(InterveneArgs),
    /// Budget sweep over sampled shocks with TVaR tables
    Stress(StressArgs),
    /// Search for the asset shock causing the most defaults
    Maxshock(MaxShockArgs),
    /// Write a hardness gadget network for a small graph
    Gadget(GadgetArgs),
    /// Write a synthetic input-output table
    GenFixture(GenFixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    ThreeSector,
    Synthetic200,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// Input-output table CSV
    #[arg(long, required_unless_present = "fixture")]
    pub input: Option<PathBuf>,
    /// Use a built-in table instead of --input
    #[arg(long, value_enum, num_args = 0..=1, default_missing_value = "three-sector", conflicts_with = "input")]
    pub fixture: Option<Fixture>,
    #[arg(long)]
    pub out: PathBuf,
    /// Failure cost as a share of value added
    #[arg(long, default_value_t = 0.1)]
    pub beta_factor: f64,
    /// Drop sectors with value added below this share of the median
    #[arg(long, default_value_t = 1e-6)]
    pub va_cutoff: f64,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long, default_value_t = 1)]
    pub header_rows: usize,
    #[arg(long, default_value_t = 1)]
    pub key_columns: usize,
    #[arg(long, default_value = "VA")]
    pub va_label: String,
    #[arg(long, default_value = "TOT_GO")]
    pub go_label: String,
    /// Column labels to ignore, comma separated
    #[arg(long, value_delimiter = ',', default_value = "TOT")]
    pub skip_columns: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Best,
    Worst,
}

/// Shock selection shared by several commands.
#[derive(Debug, Clone, Args)]
pub struct ShockArgs {
    /// CSV of gross returns: one row per scenario, columns `gross_*` or one per asset
    #[arg(long)]
    pub shock: Option<PathBuf>,
    /// Scenario row of --shock to use
    #[arg(long, default_value_t = 0)]
    pub row: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Best)]
    pub mode: Mode,
    #[command(flatten)]
    pub shock: ShockArgs,
    /// Include the per-firm table
    #[arg(long)]
    pub per_firm: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    /// Budget as a share of total asset value
    #[arg(long, default_value_t = 0.01)]
    pub budget: f64,
    /// Treat --budget as an amount in currency units
    #[arg(long)]
    pub absolute: bool,
}

#[derive(Debug, Clone, Args)]
pub struct InterveneArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[command(flatten)]
    pub shock: ShockArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long, default_value_t = Algorithm::DiscountFracCost)]
    pub algo: Algorithm,
    /// Half-width of the uniform threshold band; 0 for fixed thresholds
    #[arg(long, default_value_t = 0.0)]
    pub band: f64,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plan JSON path; printed to stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StressArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long, default_value_t = 5000)]
    pub scenarios: usize,
    /// Budgets as shares of total asset value
    #[arg(long, value_delimiter = ',', default_value = "0,0.001,0.005,0.01")]
    pub budgets: Vec<f64>,
    #[arg(long, default_value_t = 0.6)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.15)]
    pub sigma: f64,
    #[arg(long, default_value_t = -0.3, allow_hyphen_values = true)]
    pub drift: f64,
    /// Lowest gross return
    #[arg(long, default_value_t = 0.0)]
    pub floor: f64,
    #[arg(long, default_value_t = Algorithm::DiscountFracCost)]
    pub algo: Algorithm,
    #[arg(long, default_value_t = 0.0)]
    pub band: f64,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.4,0.6,1")]
    pub quantiles: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub bin_width: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct MaxShockArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Enumerate every affordable asset set
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t = HeuristicArg::Greedy)]
    pub heuristic: HeuristicArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeuristicArg {
    Greedy,
    Discount,
    Exact,
}

impl From<HeuristicArg> for ShockHeuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::Greedy => ShockHeuristic::Greedy,
            HeuristicArg::Discount => ShockHeuristic::Discount,
            HeuristicArg::Exact => ShockHeuristic::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GadgetKind {
    IndependentSet,
    MaxShock,
}

#[derive(Debug, Clone, Args)]
pub struct GadgetArgs {
    #[arg(long, value_enum, default_value_t = GadgetKind::IndependentSet)]
    pub kind: GadgetKind,
    #[arg(long)]
    pub vertices: usize,
    /// Edges as `i-j`, comma separated
    #[arg(long, value_delimiter = ',')]
    pub edges: Vec<String>,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenFixtureArgs {
    #[arg(long, default_value_t = 200)]
    pub sectors: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs one command inside a pool of `threads` workers.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(e.to_string()))?;
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| {
        let out = &mut buf;
        match &cli.command {
            Command::Build(a) => cmd_build(a, out),
            Command::Solve(a) => cmd_solve(a, out),
            Command::Intervene(a) => cmd_intervene(a, out),
            Command::Stress(a) => cmd_stress(a, out),
            Command::Maxshock(a) => cmd_maxshock(a, out),
            Command::Gadget(a) => cmd_gadget(a, out),
            Command::GenFixture(a) => cmd_gen_fixture(a, out),
        }
    });
    out.write_all(&buf)?;
    result
}

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
