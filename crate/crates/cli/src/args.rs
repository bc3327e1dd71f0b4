use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "freqcause", version, about = "Frequency-domain Granger causality tests on CSV panels")]
pub struct Cli {
    /// Worker threads for bootstrap and simulation work.
    #[arg(long, global = true, env = "FREQCAUSE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Causality spectrum of fitted VAR models.
    Spectrum(SpectrumArgs),
    /// Bootstrap test of the unconditional causality spectrum.
    TestUncond(TestArgs),
    /// Bootstrap test of the conditional causality spectrum, once per conditioning series.
    TestCond(TestArgs),
    /// Two-sided bootstrap test of unconditional minus conditional causality.
    TestDiff(TestArgs),
    /// Parametric frequency-wise F test of zero causality.
    BcTest(BcArgs),
    /// Monte Carlo rates for built-in or configured designs.
    Simulate(SimulateArgs),
    /// Hodrick-Prescott trend and cycle of each series.
    HpFilter(HpArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file: header row, optional label column, numeric columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Take natural logs of this column (repeatable).
    #[arg(long = "log", value_name = "COL")]
    pub log: Vec<String>,
    /// Replace every series by its HP cycle with this smoothing parameter.
    #[arg(long)]
    pub hp_lambda: Option<f64>,
    /// Average non-overlapping groups of three rows (monthly to quarterly).
    #[arg(long)]
    pub quarterly_average: bool,
}

#[derive(Debug, Args)]
pub struct RoleArgs {
    #[arg(long)]
    pub effect: String,
    #[arg(long)]
    pub cause: String,
    /// Conditioning series (repeatable; one result each).
    #[arg(long)]
    pub conditioning: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Fixed lag order; BIC selection when omitted.
    #[arg(long)]
    pub lag: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    #[arg(long)]
    pub no_intercept: bool,
    /// Frequency grid base M (default: sample length).
    #[arg(long)]
    pub grid_base: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LagPolicyArg {
    FixedFromData,
    ReselectPerReplicate,
}

#[derive(Debug, Args)]
pub struct BootArgs {
    /// Bootstrap replicates (default 1000; 500 for simulate).
    #[arg(long)]
    pub n_boot: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Mean block length (default: ceil(T^(1/3))).
    #[arg(long)]
    pub block_length: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = LagPolicyArg::FixedFromData)]
    pub lag_policy: LagPolicyArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Multiplier applied to reported frequencies (display only).
    #[arg(long, default_value_t = 1.0)]
    pub freq_scale: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Unconditional,
    Conditional,
    Difference,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub roles: RoleArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Spectrum kind (default: conditional when conditioning is given).
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub roles: RoleArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub boot: BootArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BcArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub roles: RoleArgs,
    /// Lag order; BIC selection when omitted.
    #[arg(long)]
    pub lag: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    #[arg(long)]
    pub grid_base: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design name (repeatable; default: the whole catalogue).
    #[arg(long)]
    pub design: Vec<String>,
    /// TOML design file replacing the built-in catalogue.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run the designs bound to the overall-test cases.
    #[arg(long)]
    pub table1: bool,
    #[arg(long)]
    pub n_mc: Option<usize>,
    /// Sample length override.
    #[arg(long)]
    pub length: Option<usize>,
    #[command(flatten)]
    pub boot: BootArgs,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    #[arg(long)]
    pub no_intercept: bool,
    /// Also report F-test rejection rates.
    #[arg(long)]
    pub bc: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HpArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1600.0)]
    pub lambda: f64,
    /// Columns to filter (repeatable; default: all).
    #[arg(long)]
    pub column: Vec<String>,
    #[arg(long = "log", value_name = "COL")]
    pub log: Vec<String>,
    #[arg(long)]
    pub quarterly_average: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}
