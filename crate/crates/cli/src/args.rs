use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hetcause::Method;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "hetcause",
    version,
    about = "Instantaneous causality tests for VAR processes with time-varying variance"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a VAR(p) by OLS and report coefficients with robust standard errors.
    Fit(FitArgs),
    /// Run instantaneous causality tests on the residuals of a VAR(p) fit.
    Test(TestArgs),
    /// Simulate the bivariate VAR(1) design with a time-varying covariance.
    Simulate(SimulateArgs),
    /// Monte Carlo rejection frequencies of the tests.
    Mc(McArgs),
    /// Power of the tests as the covariance amplitude c varies.
    PowerCurve(PowerCurveArgs),
    /// Kernel estimate of the time-varying residual covariance.
    Kernelvar(KernelArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// CSV file with one column per series.
    #[arg(long)]
    pub input: PathBuf,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The file has no header row; series are named x1, x2, ...
    #[arg(long)]
    pub no_header: bool,
    /// Column holding date labels, excluded from the values.
    #[arg(long)]
    pub time_column: Option<String>,
    /// Keep and reorder columns; the first d1 form the first block.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Difference the series this many times before fitting.
    #[arg(long, default_value_t = 0)]
    pub diff: usize,
    /// Subtract column means before fitting (the VAR has no intercept).
    #[arg(long)]
    pub demean: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest file; defaults to `<out>.manifest.json` when --out is given.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// VAR lag order.
    #[arg(long)]
    pub p: usize,
    /// Also report a classical Box-Pierce diagnostic up to this lag.
    #[arg(long)]
    pub portmanteau_lags: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// VAR lag order.
    #[arg(long)]
    pub p: usize,
    /// Number of leading series in the first block.
    #[arg(long)]
    pub d1: usize,
    /// Comma-separated subset of st, w, h, b.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "st,w,h,b")]
    pub methods: Vec<Method>,
    /// Bootstrap replications.
    #[arg(long = "B", default_value_t = 399)]
    pub bootstrap_b: usize,
    /// Random seed.
    #[arg(long, env = "HETCAUSE_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Fixed VARHAC prewhitening order.
    #[arg(long, conflicts_with = "varhac_aic")]
    pub varhac_m: Option<usize>,
    /// Choose the VARHAC order by AIC (the default).
    #[arg(long)]
    pub varhac_aic: bool,
    /// Largest order considered by AIC; floor(T^(1/3)) when absent.
    #[arg(long, conflicts_with = "varhac_m")]
    pub varhac_max: Option<usize>,
    /// Worker threads for the bootstrap; 0 picks automatically.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DesignArgs {
    /// 1: no instantaneous causality; 2: covariance c sin(2 pi r).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub case: u8,
    /// Variance level a.
    #[arg(long, default_value_t = 1.1)]
    pub a: f64,
    /// Variance frequency b.
    #[arg(long, default_value_t = 11.0)]
    pub b: f64,
    /// Covariance amplitude c (case 2).
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Sample size.
    #[arg(long = "T")]
    pub t_len: usize,
    /// Random seed.
    #[arg(long, env = "HETCAUSE_SEED", default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Comma-separated sample sizes.
    #[arg(
        long = "T",
        value_delimiter = ',',
        default_value = "50,100,200,500,1000"
    )]
    pub sample_sizes: Vec<usize>,
    /// Comma-separated nominal levels.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.10")]
    pub levels: Vec<f64>,
    /// Replications (1000, or 300 with --fast).
    #[arg(long = "N")]
    pub replications: Option<usize>,
    /// Bootstrap replications (299, or 199 with --fast).
    #[arg(long = "B")]
    pub bootstrap_b: Option<usize>,
    /// Comma-separated subset of st, w, h, b.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "st,w,b")]
    pub methods: Vec<Method>,
    /// Random seed.
    #[arg(long, env = "HETCAUSE_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Smaller default N and B for quick runs.
    #[arg(long)]
    pub fast: bool,
    /// Worker threads; 0 picks automatically.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PowerCurveArgs {
    /// Values of c as start:stop:step or a comma-separated list.
    #[arg(long = "c", default_value = "0.05:0.65:0.05")]
    pub c_values: String,
    /// Variance level a.
    #[arg(long, default_value_t = 1.1)]
    pub a: f64,
    /// Variance frequency b.
    #[arg(long, default_value_t = 11.0)]
    pub b: f64,
    /// Sample size.
    #[arg(long = "T", default_value_t = 500)]
    pub t_len: usize,
    /// Nominal level.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Replications (1000, or 300 with --fast).
    #[arg(long = "N")]
    pub replications: Option<usize>,
    /// Bootstrap replications (299, or 199 with --fast).
    #[arg(long = "B")]
    pub bootstrap_b: Option<usize>,
    /// Comma-separated subset of st, w, h, b.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "st,w,b")]
    pub methods: Vec<Method>,
    /// Random seed.
    #[arg(long, env = "HETCAUSE_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Smaller default N and B for quick runs.
    #[arg(long)]
    pub fast: bool,
    /// Worker threads; 0 picks automatically.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// VAR lag order.
    #[arg(long)]
    pub p: usize,
    /// Number of leading series in the first block.
    #[arg(long)]
    pub d1: usize,
    /// Kernel bandwidth in rescaled time; T^(-1/5) when absent.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Number of grid points i/grid.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Emit every entry of Σ(r), not only the cross block.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}
