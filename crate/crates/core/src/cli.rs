//! Command line front end. The `mmquote` binary only calls [`main`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::backtest::{
    calibrate, naive_baseline, run_backtest, BacktestConfig, BacktestReport, CalibrationConfig,
    ReferencePriceRule,
};
use crate::error::{Error, Result};
use crate::ladder::LadderMatrix;
use crate::output;
use crate::params::{ModelParams, ParamsDraft, Variant};
use crate::policy::{
    AsymptoticPolicy, GaussianPolicy, QuotingPolicy, SymmetricConstantPolicy, TabulatedPolicy,
    TaylorPolicy,
};
use crate::quotes::{asymptotic_quotes, gaussian_approximation};
use crate::simulator::{simulate, SimConfig};
use crate::statics::{comparative_statics_report, StaticsConfig};
use crate::tape::ingest_trades_file;
use crate::value::ValueLadder;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "MMQUOTE_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "mmquote",
    version,
    about = "Optimal quotes for an inventory-constrained market maker"
)]
struct Cli {
    /// JSON configuration file (model parameters, variant, seed).
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
#[command(next_help_heading = "Model")]
struct Overrides {
    /// Volatility, Tick/s^0.5
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Drift, Tick/s
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Fill intensity scale, 1/s
    #[arg(long = "A", global = true)]
    a: Option<f64>,
    /// Fill intensity decay, 1/Tick
    #[arg(long, global = true)]
    k: Option<f64>,
    /// Risk aversion, 1/Tick
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Price impact per fill, Tick
    #[arg(long, global = true)]
    xi: Option<f64>,
    /// Horizon, s
    #[arg(long = "T", global = true)]
    horizon: Option<f64>,
    /// Inventory bound
    #[arg(long = "Q", global = true)]
    q_max: Option<u32>,
    #[arg(long, global = true, value_enum)]
    variant: Option<VariantArg>,
    /// RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum VariantArg {
    Base,
    Drift,
    Impact,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Base => Variant::Base,
            VariantArg::Drift => Variant::Drift,
            VariantArg::Impact => Variant::Impact,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finite-horizon quote surface on a time grid.
    Quotes(GridArgs),
    /// Ground state, asymptotic quotes and their Gaussian approximation.
    Asymptotic(OutputArgs),
    /// Optimal quotes next to the near-terminal and Gaussian approximations.
    Approx(GridArgs),
    /// Comparative statics sign table of the asymptotic quotes.
    Statics(StaticsArgs),
    /// Monte Carlo simulation of a quoting policy.
    Simulate(SimulateArgs),
    /// Replays a quoting policy against a trade file.
    Backtest(BacktestArgs),
    /// Estimates sigma, A and k from a trade file.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args, Serialize)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct GridArgs {
    /// Time grid `start:end:step` in seconds; defaults to `0:T:1`.
    #[arg(long)]
    t_grid: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
struct StaticsArgs {
    #[arg(long, default_value_t = 1e-4)]
    rel_step: f64,
    #[arg(long, default_value_t = 1e-4)]
    mu_step: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PolicyArg {
    Optimal,
    Asymptotic,
    Gaussian,
    Taylor,
    Constant,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "optimal")]
    policy: PolicyArg,
    /// Offset of the constant policy; half the Gaussian spread when omitted.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 100.0)]
    s0: f64,
    #[arg(long, default_value_t = 0)]
    q0: i32,
    /// Time step of the tabulated optimal policy.
    #[arg(long, default_value_t = 0.1)]
    table_step: f64,
    /// Number of trajectories written to `--paths-output`.
    #[arg(long, default_value_t = 10)]
    record_paths: usize,
    #[arg(long, default_value_t = 100)]
    record_stride: usize,
    /// Per-path CSV dump of recorded trajectories.
    #[arg(long)]
    paths_output: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ReferenceArg {
    Mid,
    LastTrade,
    Ewma,
}

#[derive(Debug, Args, Serialize)]
struct BacktestArgs {
    /// Trade CSV (`timestamp,price,size[,best_bid,best_ask]`).
    #[arg(long)]
    trades: PathBuf,
    #[arg(long, value_enum, default_value = "optimal")]
    policy: PolicyArg,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    tick_size: f64,
    #[arg(long, default_value_t = 5.0)]
    requote_dt: f64,
    #[arg(long, default_value_t = 1.0)]
    ats: f64,
    #[arg(long, value_enum, default_value = "mid")]
    reference: ReferenceArg,
    #[arg(long, default_value_t = 30.0)]
    half_life: f64,
    /// Price grid in Ticks.
    #[arg(long, default_value_t = 1.0)]
    rounding_increment: f64,
    #[arg(long, default_value_t = 0)]
    q0: i32,
    #[arg(long, default_value_t = 0.1)]
    table_step: f64,
    /// Also run the best-quote baseline on the same tape.
    #[arg(long)]
    baseline: bool,
    /// Writes `<prefix>pnl.csv`, `<prefix>fills.csv` and `<prefix>evaluations.csv`.
    #[arg(long)]
    csv_prefix: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
struct CalibrateArgs {
    #[arg(long)]
    trades: PathBuf,
    /// Use only the last N trades.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value_t = 500)]
    min_trades: usize,
    #[arg(long, default_value_t = 1.0)]
    tick_size: f64,
    #[arg(long, default_value_t = 10)]
    buckets: usize,
    #[command(flatten)]
    out: OutputArgs,
}

/// Contents of a configuration file; every field is optional and falls back
/// to the reference parameter set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub sigma: Option<f64>,
    pub mu: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    pub k: Option<f64>,
    pub gamma: Option<f64>,
    pub xi: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    #[serde(rename = "Q")]
    pub q_max: Option<u32>,
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    /// Reads a configuration file, or the `config` section of a run manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let section = match value.get("config") {
            Some(c) if value.get("command").is_some() => c.clone(),
            _ => value,
        };
        Ok(serde_json::from_value(section)?)
    }
}

/// Fully resolved configuration: defaults, then file, then flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub params: ModelParams,
    pub variant: Variant,
    pub seed: u64,
}

impl ResolvedConfig {
    fn as_file(&self) -> ConfigFile {
        let d = self.params.draft();
        ConfigFile {
            sigma: Some(d.sigma),
            mu: Some(d.mu),
            a: Some(d.a),
            k: Some(d.k),
            gamma: Some(d.gamma),
            xi: Some(d.xi),
            horizon: Some(d.horizon),
            q_max: Some(d.q_max),
            variant: Some(self.variant),
            seed: Some(self.seed),
        }
    }
}

fn resolve(file: ConfigFile, flags: &Overrides) -> Result<ResolvedConfig> {
    let r = ParamsDraft::reference();
    let draft = ParamsDraft {
        sigma: flags.sigma.or(file.sigma).unwrap_or(r.sigma),
        mu: flags.mu.or(file.mu).unwrap_or(r.mu),
        a: flags.a.or(file.a).unwrap_or(r.a),
        k: flags.k.or(file.k).unwrap_or(r.k),
        gamma: flags.gamma.or(file.gamma).unwrap_or(r.gamma),
        xi: flags.xi.or(file.xi).unwrap_or(r.xi),
        horizon: flags.horizon.or(file.horizon).unwrap_or(r.horizon),
        q_max: flags.q_max.or(file.q_max).unwrap_or(r.q_max),
    };
    Ok(ResolvedConfig {
        params: draft.validate()?,
        variant: flags
            .variant
            .map(Variant::from)
            .or(file.variant)
            .unwrap_or(Variant::Base),
        seed: flags.seed.or(file.seed).unwrap_or(0),
    })
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub argv: Vec<String>,
    pub config: ConfigFile,
    pub seed: u64,
    pub options: serde_json::Value,
    pub outputs: Vec<String>,
}

/// Parses `start:end:step`; the end point is included when the grid hits it.
pub fn parse_time_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::domain("t-grid", format!("expected start:end:step, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(end >= start) || !start.is_finite() || !end.is_finite() {
        return Err(bad());
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
    if let Some(last) = grid.last_mut() {
        if (*last - end).abs() <= 1e-9 * step {
            *last = end;
        }
    }
    Ok(grid)
}

struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn write_json<T: Serialize>(value: &T, sink: &Sink) -> Result<()> {
    let mut w = sink.open()?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn build_policy(
    choice: PolicyArg,
    delta: Option<f64>,
    table_step: f64,
    config: &ResolvedConfig,
) -> Result<Box<dyn QuotingPolicy>> {
    let params = &config.params;
    let matrix = LadderMatrix::build(params, config.variant);
    Ok(match choice {
        PolicyArg::Optimal => {
            if !(table_step > 0.0) {
                return Err(Error::domain("table_step", "must be > 0"));
            }
            Box::new(TabulatedPolicy::optimal(
                &ValueLadder::new(matrix)?,
                table_step,
            )?)
        }
        PolicyArg::Asymptotic => {
            Box::new(AsymptoticPolicy::new(params, &asymptotic_quotes(&matrix)?))
        }
        PolicyArg::Gaussian => Box::new(GaussianPolicy::new(params, config.variant)),
        PolicyArg::Taylor => Box::new(TaylorPolicy::new(params)),
        PolicyArg::Constant => {
            let delta = match delta {
                Some(d) => d,
                None => {
                    0.5 * gaussian_approximation(params, config.variant, 0)
                        .spread
                        .unwrap_or(f64::NAN)
                }
            };
            if !delta.is_finite() {
                return Err(Error::domain("delta", "must be finite"));
            }
            Box::new(SymmetricConstantPolicy {
                delta,
                q_max: params.q_max(),
            })
        }
    })
}

fn write_backtest_csv(
    report: &BacktestReport,
    prefix: &str,
    outputs: &mut Vec<String>,
) -> Result<()> {
    let mut emit = |name: &str, f: &dyn Fn(File) -> Result<()>| -> Result<()> {
        let path = format!("{prefix}{name}");
        f(File::create(&path)?)?;
        outputs.push(path);
        Ok(())
    };
    emit("pnl.csv", &|f| output::write_records(&report.pnl, f))?;
    emit("fills.csv", &|f| output::write_records(&report.fills, f))?;
    emit("evaluations.csv", &|f| {
        output::write_records(&report.evaluations, f)
    })?;
    Ok(())
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let config = resolve(file, &cli.overrides)?;
    let params = config.params;
    let mut outputs = Vec::new();
    let primary;

    let (name, options) = match &cli.command {
        Command::Quotes(args) | Command::Approx(args) => {
            let ladder = ValueLadder::new(LadderMatrix::build(&params, config.variant))?;
            let default_grid = format!("0:{}:1", params.horizon());
            let grid = parse_time_grid(args.t_grid.as_deref().unwrap_or(&default_grid))?;
            for &t in &grid {
                params.check_time(t)?;
            }
            primary = Sink {
                path: args.out.output.clone(),
            };
            let w = primary.open()?;
            let name = if let Command::Quotes(_) = cli.command {
                output::write_quote_surface(&ladder, &grid, w)?;
                "quotes"
            } else {
                output::write_approximations(&ladder, &grid, w)?;
                "approx"
            };
            (
                name,
                json!({ "t_grid": args.t_grid.clone().unwrap_or(default_grid) }),
            )
        }
        Command::Asymptotic(args) => {
            let ladder = ValueLadder::new(LadderMatrix::build(&params, config.variant))?;
            let solution = asymptotic_quotes(ladder.matrix())?;
            primary = Sink {
                path: args.output.clone(),
            };
            output::write_asymptotic_table(&ladder, &solution, primary.open()?)?;
            ("asymptotic", json!({ "lambda0": solution.lambda0 }))
        }
        Command::Statics(args) => {
            let cfg = StaticsConfig {
                rel_step: args.rel_step,
                mu_step: args.mu_step,
                ..StaticsConfig::default()
            };
            let report = comparative_statics_report(&params, config.variant, &cfg)?;
            primary = Sink {
                path: args.out.output.clone(),
            };
            output::write_statics(&report, primary.open()?)?;
            let disagreements = report.disagreements().count();
            for r in report.disagreements() {
                eprintln!(
                    "warning: sign of d{}/d{} at q={} is {} (expected {})",
                    r.side.name(),
                    r.parameter.name(),
                    r.q,
                    r.sign,
                    r.expected_sign.unwrap_or(0)
                );
            }
            (
                "statics",
                json!({ "args": args, "disagreements": disagreements }),
            )
        }
        Command::Simulate(args) => {
            let policy = build_policy(args.policy, args.delta, args.table_step, &config)?;
            let sim_cfg = SimConfig {
                n_paths: args.paths,
                dt: args.dt,
                seed: config.seed,
                s0: args.s0,
                q0: args.q0,
                record_paths: if args.paths_output.is_some() {
                    args.record_paths
                } else {
                    0
                },
                record_stride: args.record_stride.max(1),
                ..SimConfig::default()
            };
            let sim = simulate(&params, policy.as_ref(), &sim_cfg)?;
            primary = Sink {
                path: args.out.output.clone(),
            };
            write_json(&sim.summary, &primary)?;
            if let Some(p) = &args.paths_output {
                output::write_sim_paths(&sim, File::create(p)?)?;
                outputs.push(p.display().to_string());
            }
            ("simulate", json!({ "args": args, "sim": sim_cfg }))
        }
        Command::Backtest(args) => {
            let tape = ingest_trades_file(&args.trades)?;
            for w in &tape.warnings {
                eprintln!("warning: {w}");
            }
            let policy = build_policy(args.policy, args.delta, args.table_step, &config)?;
            let bt = BacktestConfig {
                params,
                tick_size: args.tick_size,
                requote_dt: args.requote_dt,
                ats: args.ats,
                reference: match args.reference {
                    ReferenceArg::Mid => ReferencePriceRule::Mid,
                    ReferenceArg::LastTrade => ReferencePriceRule::LastTrade,
                    ReferenceArg::Ewma => ReferencePriceRule::Ewma {
                        half_life: args.half_life,
                    },
                },
                rounding_increment: args.rounding_increment,
                q0: args.q0,
            };
            let report = run_backtest(&tape.records, &bt, policy.as_ref())?;
            let baseline = if args.baseline {
                Some(naive_baseline(&tape.records, &bt)?)
            } else {
                None
            };
            if let Some(prefix) = &args.csv_prefix {
                write_backtest_csv(&report, prefix, &mut outputs)?;
                if let Some(b) = &baseline {
                    write_backtest_csv(b, &format!("{prefix}baseline_"), &mut outputs)?;
                }
            }
            primary = Sink {
                path: args.out.output.clone(),
            };
            write_json(
                &json!({
                    "report": report,
                    "baseline": baseline,
                    "recompute_error": report.recompute_error(),
                }),
                &primary,
            )?;
            ("backtest", json!({ "args": args, "backtest": bt }))
        }
        Command::Calibrate(args) => {
            let tape = ingest_trades_file(&args.trades)?;
            let cfg = CalibrationConfig {
                window: args.window,
                min_trades: args.min_trades,
                tick_size: args.tick_size,
                n_buckets: args.buckets,
            };
            let cal = calibrate(&tape.records, &cfg)?;
            let calibrated = cal.apply(params.draft());
            let validation = calibrated.validate().err().map(|e| e.to_string());
            primary = Sink {
                path: args.out.output.clone(),
            };
            write_json(
                &json!({ "calibration": cal, "params": calibrated, "validation_error": validation }),
                &primary,
            )?;
            ("calibrate", json!({ "args": args }))
        }
    };

    if let Some(path) = &primary.path {
        outputs.insert(0, path.display().to_string());
        let manifest = RunManifest {
            command: name.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            argv,
            config: config.as_file(),
            seed: config.seed,
            options,
            outputs,
        };
        let mut manifest_path = path.clone().into_os_string();
        manifest_path.push(".manifest.json");
        write_json(
            &manifest,
            &Sink {
                path: Some(manifest_path.into()),
            },
        )?;
    }
    Ok(())
}

/// Runs the command line with `args` (including the program name) and
/// returns the process exit code: 0 on success, 1 on usage errors, 2 on data
/// or domain errors, 3 on numerical convergence failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let argv = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, argv) {
        Ok(()) => 0,
        Err(e) if e.is_broken_pipe() => 0,
        Err(e) => {
            let body = json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            e.exit_code()
        }
    }
}

pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_grid_includes_end() {
        let g = parse_time_grid("0:600:1").unwrap();
        assert_eq!(g.len(), 601);
        assert_eq!(g[600], 600.0);
        let g = parse_time_grid("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[10], 1.0);
        assert_eq!(parse_time_grid("5:5:1").unwrap(), vec![5.0]);
    }

    #[test]
    fn bad_time_grids_rejected() {
        for s in ["0:600", "a:b:c", "0:600:0", "10:0:1", "0:600:-1"] {
            assert!(parse_time_grid(s).is_err(), "{s}");
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file = ConfigFile {
            sigma: Some(0.6),
            k: Some(0.9),
            q_max: Some(10),
            ..ConfigFile::default()
        };
        let flags = Overrides {
            k: Some(0.5),
            seed: Some(9),
            ..Overrides::default()
        };
        let r = resolve(file, &flags).unwrap();
        let d = r.params.draft();
        assert_eq!((d.sigma, d.k, d.q_max, d.a), (0.6, 0.5, 10, 0.9));
        assert_eq!(r.seed, 9);
        assert_eq!(r.variant, Variant::Base);
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"sigma": 0.3, "lambda": 2}"#).unwrap();
        assert!(ConfigFile::load(&p).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["mmquote", "quotes", "--no-such-flag"]), 1);
        assert_eq!(run(["mmquote", "frobnicate"]), 1);
    }

    #[test]
    fn domain_errors_exit_two() {
        assert_eq!(run(["mmquote", "quotes", "--sigma=-1"]), 2);
        assert_eq!(run(["mmquote", "quotes", "--t-grid", "0:700:1"]), 2);
    }
}
