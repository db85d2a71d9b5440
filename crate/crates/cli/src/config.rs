//! Command-line surface and parameter resolution.
//!
//! Parameters come from three layers, later ones winning: built-in defaults
//! (the standard seasonal test case), an optional JSON config file with a
//! `raw` or `normalized` block, and individual flags.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hybrid_cycle::{normalize, Error, ModelParams, ParamsConfig, RawParams};

#[derive(Debug, Parser)]
#[command(
    name = "hybrid-cycle",
    about = "Pollution-control policies under periodic regime shifts: \
             optimal and myopic trajectories, limit cycles, sustainability tests",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub scenario: Scenario,
}

#[derive(Debug, Subcommand)]
pub enum Scenario {
    /// Trajectory dataset under the optimal policy
    Optimal(TrajArgs),
    /// Trajectory dataset under the myopic (profit-floor) policy
    Myopic(TrajArgs),
    /// Payoff comparison of the two policies on one grid
    Compare(TrajArgs),
    /// Hybrid limit cycle with its fixed-point certificate
    LimitCycle(CycleArgs),
    /// Sustainability region scan over (rho1, rho2)
    Region(RegionArgs),
    /// Sustainability report for one parameter set
    Sustainability(SustainArgs),
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// JSON config file with exactly one of a `raw` or `normalized` block
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Impact ratio β
    #[arg(long)]
    pub beta: Option<f64>,
    /// Self-cleaning rate of the first regime
    #[arg(long)]
    pub delta1: Option<f64>,
    /// Self-cleaning rate of the second regime
    #[arg(long)]
    pub delta2: Option<f64>,
    /// Discount rate
    #[arg(long)]
    pub r: Option<f64>,
    /// Switching time within each period
    #[arg(long)]
    pub ts: Option<f64>,
    /// Regime period T
    #[arg(long)]
    pub period: Option<f64>,
    /// Initial normalized pollution stock
    #[arg(long)]
    pub x0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrajArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Final integration time
    #[arg(long, default_value_t = 20.0)]
    pub horizon: f64,
    /// Nominal integrator step
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CycleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Output file; required for csv, which writes a `.json` sidecar next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// rho1 scan range as lo:hi
    #[arg(long = "rho1-range", value_parser = parse_range)]
    pub rho1_range: (f64, f64),
    /// rho2 scan range as lo:hi
    #[arg(long = "rho2-range", value_parser = parse_range)]
    pub rho2_range: (f64, f64),
    /// Grid points per axis
    #[arg(long)]
    pub grid: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SustainArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound `{lo}`: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound `{hi}`: {e}"))?;
    Ok((lo, hi))
}

/// Defaults: the standard seasonal test case.
const DEFAULTS: [f64; 7] = [0.8, 0.5, 1.5, 0.03, 0.5, 1.0, 0.0]; // beta d1 d2 r ts T x0

impl ParamArgs {
    /// Resolves defaults, config file, and flags into validated parameters.
    /// The raw block survives only when no flag overrides it, so the
    /// raw-parameter corollary is never reported against stale data.
    pub fn resolve(&self) -> Result<(ModelParams, Option<RawParams>), CliError> {
        let [mut beta, mut delta1, mut delta2, mut r, mut ts, mut period, mut x0] = DEFAULTS;
        let mut raw_block: Option<RawParams> = None;

        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let cfg = ParamsConfig::from_json(&text)?;
            if let Some(raw) = cfg.raw {
                let normalized = normalize(&raw)?;
                beta = normalized.beta;
                delta1 = normalized.delta1;
                delta2 = normalized.delta2;
                r = normalized.r;
                ts = normalized.t_s;
                period = normalized.period;
                x0 = normalized.x0;
                raw_block = Some(raw);
            }
            if let Some(n) = cfg.normalized {
                beta = n.beta.unwrap_or(beta);
                delta1 = n.delta1.unwrap_or(delta1);
                delta2 = n.delta2.unwrap_or(delta2);
                r = n.r.unwrap_or(r);
                ts = n.t_s.unwrap_or(ts);
                period = n.period.unwrap_or(period);
                x0 = n.x0.unwrap_or(x0);
            }
        }

        let overridden = [
            self.beta, self.delta1, self.delta2, self.r, self.ts, self.period, self.x0,
        ]
        .iter()
        .any(Option::is_some);
        if overridden {
            raw_block = None;
        }
        beta = self.beta.unwrap_or(beta);
        delta1 = self.delta1.unwrap_or(delta1);
        delta2 = self.delta2.unwrap_or(delta2);
        r = self.r.unwrap_or(r);
        ts = self.ts.unwrap_or(ts);
        period = self.period.unwrap_or(period);
        x0 = self.x0.unwrap_or(x0);

        let params = ModelParams::new(beta, delta1, delta2, r, ts, period, x0)?;
        Ok((params, raw_block))
    }
}

/// Worker cap for the region scan, from `HYBRID_CYCLE_THREADS`.
pub fn region_threads() -> Result<usize, CliError> {
    match std::env::var("HYBRID_CYCLE_THREADS") {
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Validation(format!(
                "HYBRID_CYCLE_THREADS must be a positive integer, got `{text}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) | CliError::Numerical(msg) | CliError::Io(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::NoConvergence { .. } => CliError::Numerical(err.to_string()),
            _ => CliError::Validation(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Io(format!("json: {err}"))
    }
}
