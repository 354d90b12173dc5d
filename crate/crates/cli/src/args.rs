use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corrsurf::{DecoderOptions, MetricKind, ModelKind, RunConfig};

/// Smallest accepted `--knn`; fewer neighbours routinely leave clusters
/// without a perfect matching.
pub const MIN_KNN: usize = 6;

#[derive(Debug, Parser)]
#[command(
    name = "corrsurf",
    version,
    about = "Surface code memory simulator with correlated noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one configuration.
    Run(GridArgs),
    /// Estimate every (model, d, p) combination, one row each.
    Sweep(GridArgs),
    /// Write plot-ready datasets for one of the standard figure layouts.
    Figure(FigureArgs),
    /// Run the built-in consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Neighbour limit for the decoding graph: a count or `off`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Knn(pub Option<usize>);

fn parse_knn(s: &str) -> Result<Knn, String> {
    if s == "off" {
        return Ok(Knn(None));
    }
    let k: usize = s
        .parse()
        .map_err(|_| format!("expected a count or 'off', got '{s}'"))?;
    if k < MIN_KNN {
        return Err(format!("knn must be at least {MIN_KNN}"));
    }
    Ok(Knn(Some(k)))
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("expected a positive integer, got '{s}'")),
    }
}

fn parse_probability(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(p) if (0.0..=1.0).contains(&p) => Ok(p),
        _ => Err(format!("expected a probability in [0, 1], got '{s}'")),
    }
}

/// Execution knobs shared by every simulating subcommand.
#[derive(Debug, Clone, Args)]
pub struct ExecArgs {
    /// Worker threads (default: all cores).
    #[arg(long, env = "CORRSURF_THREADS", value_parser = parse_positive)]
    pub threads: Option<usize>,
    /// Stop a cell early once this many logical-X failures are seen
    /// (400 when given without a value).
    #[arg(long, num_args = 0..=1, default_missing_value = "400")]
    pub target_failures: Option<u64>,
    /// Nearest neighbours kept per detection event, or `off`.
    #[arg(long, default_value = "off", value_parser = parse_knn)]
    pub knn: Knn,
    /// Edge weights for matching: weighted, circuit or manhattan.
    #[arg(long, default_value_t = MetricKind::Weighted)]
    pub metric: MetricKind,
    /// Report wall-clock seconds (otherwise 0, keeping output reproducible).
    #[arg(long)]
    pub timing: bool,
}

impl ExecArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        cfg.workers = self.threads;
        cfg.target_failures = self.target_failures;
        cfg.decoder = DecoderOptions {
            knn: self.knn.0,
            metric: self.metric,
        };
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Code distance; repeat or comma-separate for several.
    #[arg(long = "d", value_delimiter = ',', default_value = "3")]
    pub distances: Vec<usize>,
    /// Physical error rate; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',', default_value = "0.001", value_parser = parse_probability)]
    pub p: Vec<f64>,
    /// Noise model: none, exp:<n>, poly:<n>, pair:<A>,<n>, column:<A>[:xx].
    /// Repeat for several.
    #[arg(long, default_value = "none")]
    pub model: Vec<ModelKind>,
    /// Shots per configuration (the cap with --target-failures).
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    /// Noisy rounds per shot (default: d).
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub exec: ExecArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Skip the first N configurations and append to the existing output.
    #[arg(long, default_value_t = 0)]
    pub resume_from: usize,
}

impl GridArgs {
    /// Configurations in output order: model, then distance, then p.
    pub fn configs(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for &model in &self.model {
            for &d in &self.distances {
                for &p in &self.p {
                    let mut cfg = RunConfig::new(d, p, model, self.shots, self.seed);
                    cfg.rounds = self.rounds;
                    self.exec.apply(&mut cfg);
                    out.push(cfg);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Fig2,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub name: FigureName,
    /// Decay parameter (fig4 default 10, fig5 and fig6 default 2).
    #[arg(long)]
    pub n: Option<f64>,
    /// Amplitude (fig6 and fig7, default 1).
    #[arg(long)]
    pub a: Option<f64>,
    /// Largest odd distance simulated, starting from 3.
    #[arg(long, default_value_t = 9)]
    pub dmax: usize,
    /// Physical error rates (default: a fixed log-spaced grid).
    #[arg(long, value_delimiter = ',', value_parser = parse_probability)]
    pub p: Vec<f64>,
    /// Shots per cell; 0 writes the manifest only.
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub exec: ExecArgs,
    /// Output directory (default: the figure name).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
