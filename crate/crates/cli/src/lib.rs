//! Command-line front end: argument parsing, config resolution, dispatch and
//! JSON / CSV rendering.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use foa_core::equilibrium::{self, Mode};
use foa_core::gauss::CovSpec;
use foa_core::payoff::{self, GameConfig, Offer};
use foa_core::solver::{self, GridSpec, Side, VerifyOptions};
use foa_core::mc;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] foa_core::Error),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_convergence() => 4,
            CliError::Core(_) | CliError::Validation(_) | CliError::Io { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form issue-by-issue and whole-package equilibria
    Equilibrium,
    /// Expected award, z-score and win probabilities for two offers
    Payoff,
    /// Numerical best response to a fixed opponent
    BestResponse,
    /// Damped alternating best-response search
    FixedPoint,
    /// Grid verification of global optimality, property suite and angle check
    Verify,
    /// Monte Carlo replay of the arbiter
    Simulate,
    /// Analytic award variances against simulation
    Variance,
    /// Randomized kernel property checks
    Lemmas,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Payoff => "payoff",
            Command::BestResponse => "best-response",
            Command::FixedPoint => "fixed-point",
            Command::Verify => "verify",
            Command::Simulate => "simulate",
            Command::Variance => "variance",
            Command::Lemmas => "lemmas",
        }
    }
}

fn parse_offer(s: &str) -> Result<Offer, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected an offer as `x,y`, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number `{v}` in offer `{s}`: {e}"))
    };
    Ok(Offer::new(parse(x)?, parse(y)?))
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s.to_ascii_lowercase().as_str() {
        "ibi" => Ok(Mode::Ibi),
        "wp" => Ok(Mode::Wp),
        _ => Err(format!("mode must be `ibi` or `wp`, got `{s}`")),
    }
}

fn parse_side(s: &str) -> Result<Side, String> {
    match s.to_ascii_lowercase().as_str() {
        "minimizer" | "i" | "1" => Ok(Side::Minimizer),
        "maximizer" | "ii" | "2" => Ok(Side::Maximizer),
        _ => Err(format!("side must be `minimizer` or `maximizer`, got `{s}`")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "foa", version, about = "Two-issue final-offer arbitration engine")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma_x: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma_y: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Half-width of the strategy square (default 10 * sqrt(sigma_x^2 + sigma_y^2))
    #[arg(long, global = true)]
    pub bound: Option<f64>,
    /// Odd grid resolution for verification
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Monte Carlo sample count
    #[arg(long, global = true)]
    pub n: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[arg(long, global = true, value_enum)]
    pub output: Option<OutputFormat>,
    /// JSON file with RunConfig fields; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Player I offer `x,y`
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_offer)]
    pub a: Option<Offer>,
    /// Player II offer `x,y`
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_offer)]
    pub b: Option<Offer>,
    /// Fixed opponent offer `x,y` for best-response
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_offer)]
    pub opponent: Option<Offer>,
    /// Responding side for best-response: minimizer (Player I) or maximizer (Player II)
    #[arg(long, global = true, value_parser = parse_side)]
    pub side: Option<Side>,
    /// Randomized trials per property check
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Run global verification even when rho <= 0
    #[arg(long, global = true)]
    pub allow_nonpositive_rho: bool,
    /// Worker threads for parallel commands; never changes results
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

/// Fully resolved run configuration, echoed in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
    pub bound: f64,
    pub grid: usize,
    pub n: u64,
    pub seed: u64,
    pub mode: Mode,
    pub output: OutputFormat,
    pub trials: usize,
    pub allow_nonpositive_rho: bool,
    pub side: Side,
    pub a: Option<Offer>,
    pub b: Option<Offer>,
    pub opponent: Option<Offer>,
}

/// Config file contents: any subset of [`RunConfig`] fields.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    sigma_x: Option<f64>,
    sigma_y: Option<f64>,
    rho: Option<f64>,
    bound: Option<f64>,
    grid: Option<usize>,
    n: Option<u64>,
    seed: Option<u64>,
    mode: Option<Mode>,
    output: Option<OutputFormat>,
    trials: Option<usize>,
    allow_nonpositive_rho: Option<bool>,
    side: Option<Side>,
    a: Option<Offer>,
    b: Option<Offer>,
    opponent: Option<Offer>,
}

impl RunConfig {
    pub const DEFAULT_N: u64 = 1_000_000;
    pub const DEFAULT_TRIALS: usize = 10_000;

    /// Defaults, then the config file, then flags.
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let sigma_x = cli.sigma_x.or(file.sigma_x).unwrap_or(1.0);
        let sigma_y = cli.sigma_y.or(file.sigma_y).unwrap_or(1.0);
        let rho = cli.rho.or(file.rho).unwrap_or(0.0);
        let cov = CovSpec::new(sigma_x, sigma_y, rho)?;
        let bound = match cli.bound.or(file.bound) {
            Some(l) => GameConfig::new(cov, l)?.bound(),
            None => GameConfig::with_default_bound(cov).bound(),
        };
        let cfg = RunConfig {
            sigma_x,
            sigma_y,
            rho,
            bound,
            grid: cli.grid.or(file.grid).unwrap_or(GridSpec::DEFAULT_RESOLUTION),
            n: cli.n.or(file.n).unwrap_or(Self::DEFAULT_N),
            seed: cli.seed.or(file.seed).unwrap_or(0),
            mode: cli.mode.or(file.mode).unwrap_or(Mode::Wp),
            output: cli.output.or(file.output).unwrap_or(OutputFormat::Json),
            trials: cli.trials.or(file.trials).unwrap_or(Self::DEFAULT_TRIALS),
            allow_nonpositive_rho: cli.allow_nonpositive_rho || file.allow_nonpositive_rho.unwrap_or(false),
            side: cli.side.or(file.side).unwrap_or(Side::Minimizer),
            a: cli.a.or(file.a),
            b: cli.b.or(file.b),
            opponent: cli.opponent.or(file.opponent),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let game = self.game()?;
        GridSpec::new(self.grid, self.bound)?;
        if self.n == 0 {
            return Err(CliError::Validation("sample count n must be positive".into()));
        }
        if self.trials == 0 {
            return Err(CliError::Validation("trials must be positive".into()));
        }
        for offer in [self.a, self.b, self.opponent].into_iter().flatten() {
            game.check_offer(offer)?;
        }
        Ok(())
    }

    pub fn cov(&self) -> Result<CovSpec, CliError> {
        Ok(CovSpec::new(self.sigma_x, self.sigma_y, self.rho)?)
    }

    pub fn game(&self) -> Result<GameConfig, CliError> {
        Ok(GameConfig::new(self.cov()?, self.bound)?)
    }
}

/// One command's output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: RunConfig,
    pub result: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize to JSON")
}

fn require(offer: Option<Offer>, flag: &str, command: Command) -> Result<Offer, CliError> {
    offer.ok_or_else(|| CliError::Usage(format!("`{}` needs --{flag} x,y", command.name())))
}

/// Runs one command. `workers` sets the thread count for parallel commands and
/// never changes the output.
pub fn dispatch(command: Command, cfg: &RunConfig, workers: Option<usize>) -> Result<Report, CliError> {
    let result = match workers {
        Some(0) => return Err(CliError::Validation("workers must be positive".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Validation(format!("cannot start {w} workers: {e}")))?
            .install(|| run(command, cfg))?,
        None => run(command, cfg)?,
    };
    Ok(Report {
        command: command.name(),
        config: cfg.clone(),
        result,
    })
}

fn run(command: Command, cfg: &RunConfig) -> Result<Value, CliError> {
    let game = cfg.game()?;
    let cov = *game.cov();
    Ok(match command {
        Command::Equilibrium => {
            let ibi = equilibrium::ibi_equilibrium(&cov);
            let wp = equilibrium::wp_equilibrium(&cov);
            json!({
                "x2_star": wp.b_star.x,
                "ibi": to_value(&ibi),
                "wp": to_value(&wp),
                "local_condition": to_value(&equilibrium::local_condition(&cov)),
                "hessian": to_value(&equilibrium::hessian_diagnostics(&game)),
            })
        }
        Command::Payoff => {
            let a = require(cfg.a, "a", command)?;
            let b = require(cfg.b, "b", command)?;
            to_value(&payoff::payoff_breakdown(&game, a, b)?)
        }
        Command::BestResponse => {
            let opp = require(cfg.opponent, "opponent", command)?;
            to_value(&solver::best_response(&game, opp, cfg.side)?)
        }
        Command::FixedPoint => {
            let (sx, sy) = (cov.sigma_x(), cov.sigma_y());
            let a = cfg.a.unwrap_or(Offer::new(-2.0 * sx, -sy));
            let b = cfg.b.unwrap_or(Offer::new(sx, 2.0 * sy));
            to_value(&solver::fixed_point_search(&game, a, b)?)
        }
        Command::Verify => {
            let pair = equilibrium::wp_equilibrium(&cov);
            let grid = GridSpec::new(cfg.grid, cfg.bound)?;
            let opts = VerifyOptions {
                allow_nonpositive_rho: cfg.allow_nonpositive_rho,
                ..Default::default()
            };
            let verification = solver::verify_global_equilibrium_with(&game, &pair, &grid, &opts)?;
            let lemmas = solver::lemma_suite(&game, cfg.trials, cfg.seed)?;
            // the angle check has its own hypothesis; report why it was skipped
            let angle = match solver::angle_interval_check(&cov) {
                Ok(ai) => to_value(&ai),
                Err(e) => json!({ "skipped": e.to_string() }),
            };
            json!({
                "verification": to_value(&verification),
                "lemmas": to_value(&lemmas),
                "angle_interval": angle,
            })
        }
        Command::Simulate => {
            let eq = equilibrium::equilibrium(&cov, cfg.mode);
            let a = cfg.a.unwrap_or(eq.a_star);
            let b = cfg.b.unwrap_or(eq.b_star);
            to_value(&mc::simulate_awards(&game, a, b, cfg.mode, cfg.n, cfg.seed)?)
        }
        Command::Variance => {
            let analytic = equilibrium::variance_report(&cov);
            let ibi = equilibrium::ibi_equilibrium(&cov);
            let wp = equilibrium::wp_equilibrium(&cov);
            let sim_ibi = mc::simulate_awards(&game, ibi.a_star, ibi.b_star, Mode::Ibi, cfg.n, cfg.seed)?;
            let sim_wp = mc::simulate_awards(&game, wp.a_star, wp.b_star, Mode::Wp, cfg.n, cfg.seed)?;
            let z = |emp: f64, target: f64, se: f64| if se > 0.0 { (emp - target) / se } else { 0.0 };
            json!({
                "analytic": to_value(&analytic),
                "simulated_ibi": to_value(&sim_ibi),
                "simulated_wp": to_value(&sim_wp),
                "ibi_z_vs_uncorrelated_formula": z(sim_ibi.variance_award, analytic.ibi_variance, sim_ibi.std_error_variance),
                "ibi_z_vs_correlated_formula": z(sim_ibi.variance_award, analytic.ibi_variance_correlated, sim_ibi.std_error_variance),
                "wp_z": z(sim_wp.variance_award, analytic.wp_variance, sim_wp.std_error_variance),
            })
        }
        Command::Lemmas => {
            let checks = solver::lemma_suite(&game, cfg.trials, cfg.seed)?;
            to_value(&checks)
        }
    })
}

/// Renders a report in the configured format, newline terminated.
pub fn render(report: &Report) -> String {
    match report.config.output {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Csv => to_csv(&report.result),
    }
}

/// One header row and one row per record. An array result gives one record
/// per element; anything else is a single record. Nested fields are flattened
/// with dotted names and floats carry 17 significant digits.
pub fn to_csv(result: &Value) -> String {
    let records: Vec<&Value> = match result {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    let rows: Vec<Vec<(String, String)>> = records
        .into_iter()
        .map(|r| {
            let mut cells = Vec::new();
            flatten("", r, &mut cells);
            cells
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut out = String::new();
    out.push_str(&header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in &rows {
        let line: Vec<String> = header
            .iter()
            .map(|h| {
                row.iter()
                    .find(|(k, _)| k == h)
                    .map(|(_, v)| csv_field(v))
                    .unwrap_or_default()
            })
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => flatten_map(prefix, map, out),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), item, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Number(n) => out.push((prefix.to_string(), format_number(n))),
    }
}

fn flatten_map(prefix: &str, map: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (k, v) in map {
        let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        flatten(&name, v, out);
    }
}

fn format_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN))
    } else {
        n.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses `args`, runs the command and writes the report to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let outcome = RunConfig::resolve(&cli).and_then(|cfg| dispatch(cli.command, &cfg, cli.workers));
    match outcome {
        Ok(report) => {
            if out.write_all(render(&report).as_bytes()).is_err() {
                return 1;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
