//! Run configuration: command-line flags merged over an optional flat TOML document.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use toml::{Table, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Pt2,
    Synth,
    Emulate,
    BreakdownScan,
    Threshold,
    Boundary,
    Feasibility,
    DetuningRange,
    Orbit,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Pt2,
        Command::Synth,
        Command::Emulate,
        Command::BreakdownScan,
        Command::Threshold,
        Command::Boundary,
        Command::Feasibility,
        Command::DetuningRange,
        Command::Orbit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Pt2 => "pt2",
            Command::Synth => "synth",
            Command::Emulate => "emulate",
            Command::BreakdownScan => "breakdown-scan",
            Command::Threshold => "threshold",
            Command::Boundary => "boundary",
            Command::Feasibility => "feasibility",
            Command::DetuningRange => "detuning-range",
            Command::Orbit => "orbit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Grid specification: explicit values or an evenly spaced range.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Lin { min: f64, max: f64, count: usize },
    Log { min: f64, max: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Lin { min, max, count } => pt_forge::sweep::linspace(*min, *max, *count),
            Grid::Log { min, max, count } => pt_forge::sweep::logspace(*min, *max, *count),
        }
    }

    fn validate(&self, key: &str) -> Result<(), CliError> {
        let bad = |why: &str| CliError::Usage(format!("`{key}`: {why}"));
        match self {
            Grid::List(v) => {
                if v.is_empty() {
                    return Err(bad("grid is empty"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(bad("grid values must be finite"));
                }
                if v.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(bad("grid must be strictly increasing"));
                }
            }
            Grid::Lin { min, max, count } | Grid::Log { min, max, count } => {
                if *count == 0 {
                    return Err(bad("count must be positive"));
                }
                if !(min.is_finite() && max.is_finite()) || (*count > 1 && !(max > min)) {
                    return Err(bad("range must satisfy min < max"));
                }
                if matches!(self, Grid::Log { .. }) && !(*min > 0.0) {
                    return Err(bad("log range must be positive"));
                }
            }
        }
        Ok(())
    }

    fn to_value(&self) -> Value {
        match self {
            Grid::List(v) => Value::Array(v.iter().map(|&x| Value::Float(x)).collect()),
            _ => Value::String(self.to_string()),
        }
    }

    fn from_value(key: &str, v: &Value) -> Result<Self, CliError> {
        match v {
            Value::String(s) => s.parse().map_err(|e| CliError::Usage(format!("`{key}`: {e}"))),
            Value::Array(items) => items
                .iter()
                .map(|x| number(key, x))
                .collect::<Result<_, _>>()
                .map(Grid::List),
            other => number(key, other).map(|x| Grid::List(vec![x])),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            Grid::Lin { min, max, count } => write!(f, "lin:{min}:{max}:{count}"),
            Grid::Log { min, max, count } => write!(f, "log:{min}:{max}:{count}"),
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    /// `a,b,c`, `lin:min:max:count` or `log:min:max:count`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        if let Some((kind, rest)) = s.split_once(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            let [min, max, count] = parts.as_slice() else {
                return Err(format!("expected {kind}:min:max:count, got `{s}`"));
            };
            let (min, max) = (num(min)?, num(max)?);
            let count = count
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("`{count}` is not a count"))?;
            return match kind {
                "lin" => Ok(Grid::Lin { min, max, count }),
                "log" => Ok(Grid::Log { min, max, count }),
                _ => Err(format!("unknown grid kind `{kind}`")),
            };
        }
        s.split(',').map(num).collect::<Result<_, _>>().map(Grid::List)
    }
}

// Flags shared by every subcommand. Unset flags fall back to the config document, then to
// per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat TOML document with default values for any of the keys below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub gamma_ratio: Option<f64>,
    /// Mixing angle of the initial state, in radians.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub omega_init_over_lambda: Option<f64>,
    #[arg(long)]
    pub omega03_over_lambda: Option<f64>,
    /// Integration horizon in dimensionless time.
    #[arg(long)]
    pub horizon_tau: Option<f64>,
    #[arg(long)]
    pub sample_step: Option<f64>,
    #[arg(long)]
    pub tol_abs: Option<f64>,
    #[arg(long)]
    pub tol_rel: Option<f64>,
    /// Threshold bisection tolerance, in units of lambda.
    #[arg(long)]
    pub bisection_tol: Option<f64>,
    /// Tolerance of the four-level integration.
    #[arg(long)]
    pub emulate_tol: Option<f64>,
    #[arg(long)]
    pub omega_cap: Option<f64>,
    /// Grid of gamma/lambda values: `a,b,c`, `lin:min:max:n` or `log:min:max:n`.
    #[arg(long)]
    pub gamma_list: Option<Grid>,
    #[arg(long)]
    pub omega_init_grid: Option<Grid>,
    #[arg(long)]
    pub omega03_grid: Option<Grid>,
    #[arg(long)]
    pub tau_required: Option<f64>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub omega03_max_over_lambda: Option<f64>,
    #[arg(long)]
    pub omega_init_max_over_lambda: Option<f64>,
    #[arg(long)]
    pub omega_init_points: Option<usize>,
    #[arg(long)]
    pub omega03_points: Option<usize>,
    #[arg(long)]
    pub transient_fraction: Option<f64>,
    #[arg(long)]
    pub closure_tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Subcommand)]
enum CommandArgs {
    /// Closed-form two-level PT dynamics.
    Pt2(Flags),
    /// Coupling and detuning schedules.
    Synth(Flags),
    /// Four-level forward integration under a synthesized schedule.
    Emulate(Flags),
    /// Breakdown times over gamma and initial-coupling grids.
    BreakdownScan(Flags),
    /// Recycling threshold at one parameter point.
    Threshold(Flags),
    /// Recycling threshold curves over initial coupling.
    Boundary(Flags),
    /// Feasibility region for a required duration and PT fraction (exit code 3 when infeasible).
    Feasibility(Flags),
    /// Detuning ranges of periodic schedules.
    DetuningRange(Flags),
    /// Parametric coupling trace.
    Orbit(Flags),
}

#[derive(Debug, Parser)]
#[command(
    name = "pt-forge",
    version,
    about = "Synthesize and check controls that emulate a PT-symmetric dimer in a four-level system"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

impl CommandArgs {
    fn split(self) -> (Command, Flags) {
        match self {
            CommandArgs::Pt2(f) => (Command::Pt2, f),
            CommandArgs::Synth(f) => (Command::Synth, f),
            CommandArgs::Emulate(f) => (Command::Emulate, f),
            CommandArgs::BreakdownScan(f) => (Command::BreakdownScan, f),
            CommandArgs::Threshold(f) => (Command::Threshold, f),
            CommandArgs::Boundary(f) => (Command::Boundary, f),
            CommandArgs::Feasibility(f) => (Command::Feasibility, f),
            CommandArgs::DetuningRange(f) => (Command::DetuningRange, f),
            CommandArgs::Orbit(f) => (Command::Orbit, f),
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub gamma_ratio: f64,
    pub theta: f64,
    pub omega_init_over_lambda: f64,
    pub omega03_over_lambda: f64,
    pub horizon_tau: f64,
    pub sample_step: f64,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub bisection_tol: f64,
    pub emulate_tol: f64,
    pub omega_cap: f64,
    pub gamma_list: Grid,
    pub omega_init_grid: Grid,
    pub omega03_grid: Grid,
    pub tau_required: f64,
    pub r_min: f64,
    pub omega03_max_over_lambda: f64,
    pub omega_init_max_over_lambda: f64,
    pub omega_init_points: usize,
    pub omega03_points: usize,
    pub transient_fraction: f64,
    pub closure_tol: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let horizon_tau = match command {
            Command::Pt2 => 4.0 * PI,
            _ => 400.0 * PI,
        };
        let gamma_list = match command {
            Command::Boundary => Grid::List(vec![0.5, 0.9, 0.99]),
            _ => Grid::List(vec![0.2, 0.5, 0.8]),
        };
        let omega_init_grid = match command {
            Command::DetuningRange => Grid::List(vec![0.02, 0.05, 0.1]),
            Command::Boundary => Grid::Log {
                min: 0.01,
                max: 0.2,
                count: 8,
            },
            _ => Grid::Log {
                min: 0.01,
                max: 1.0,
                count: 21,
            },
        };
        Self {
            command,
            gamma_ratio: 0.5,
            theta: PI / 2.0,
            omega_init_over_lambda: 0.05,
            omega03_over_lambda: 0.0,
            horizon_tau,
            sample_step: PI / 200.0,
            tol_abs: 1e-10,
            tol_rel: 1e-10,
            bisection_tol: 1e-5,
            emulate_tol: 1e-13,
            omega_cap: 1e3,
            gamma_list,
            omega_init_grid,
            omega03_grid: Grid::List(vec![0.02, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5]),
            tau_required: 10.0 * PI,
            r_min: 0.1,
            omega03_max_over_lambda: 2.0,
            omega_init_max_over_lambda: 1.0,
            omega_init_points: 21,
            omega03_points: 21,
            transient_fraction: 0.25,
            closure_tol: 1e-4,
            output: None,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |key: &str, why: &str| Err(CliError::Usage(format!("`{key}`: {why}")));
        if !(self.gamma_ratio >= 0.0 && self.gamma_ratio < 1.0) {
            return bad("gamma_ratio", "must satisfy 0 <= gamma_ratio < 1 (unbroken PT phase)");
        }
        for (key, v) in [
            ("sample_step", self.sample_step),
            ("tol_abs", self.tol_abs),
            ("tol_rel", self.tol_rel),
            ("bisection_tol", self.bisection_tol),
            ("emulate_tol", self.emulate_tol),
            ("omega_cap", self.omega_cap),
            ("horizon_tau", self.horizon_tau),
            ("tau_required", self.tau_required),
            ("omega_init_over_lambda", self.omega_init_over_lambda),
            ("omega_init_max_over_lambda", self.omega_init_max_over_lambda),
            ("closure_tol", self.closure_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(key, "must be positive and finite");
            }
        }
        for (key, v) in [
            ("omega03_over_lambda", self.omega03_over_lambda),
            ("omega03_max_over_lambda", self.omega03_max_over_lambda),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(key, "must be non-negative and finite");
            }
        }
        if !self.theta.is_finite() {
            return bad("theta", "must be finite");
        }
        if !(self.r_min > 0.0 && self.r_min < 1.0) {
            return bad("r_min", "must lie in (0, 1)");
        }
        if !(self.transient_fraction >= 0.0 && self.transient_fraction < 1.0) {
            return bad("transient_fraction", "must lie in [0, 1)");
        }
        if self.omega_init_points == 0 {
            return bad("omega_init_points", "must be positive");
        }
        if self.omega03_points == 0 {
            return bad("omega03_points", "must be positive");
        }
        self.gamma_list.validate("gamma_list")?;
        if self.gamma_list.values().iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            return bad("gamma_list", "values must lie in (0, 1)");
        }
        self.omega_init_grid.validate("omega_init_grid")?;
        self.omega03_grid.validate("omega03_grid")?;
        Ok(())
    }

    /// Flat TOML document holding every resolved key.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new();
        let mut put = |k: &str, v: Value| {
            t.insert(k.to_string(), v);
        };
        put("command", Value::String(self.command.name().into()));
        for (k, v) in self.float_fields() {
            put(k, Value::Float(v));
        }
        put("gamma_list", self.gamma_list.to_value());
        put("omega_init_grid", self.omega_init_grid.to_value());
        put("omega03_grid", self.omega03_grid.to_value());
        put("omega_init_points", Value::Integer(self.omega_init_points as i64));
        put("omega03_points", Value::Integer(self.omega03_points as i64));
        if let Some(p) = &self.output {
            put("output", Value::String(p.display().to_string()));
        }
        put("format", Value::String(self.format.name().into()));
        t
    }

    pub fn to_document(&self) -> String {
        self.to_table().to_string()
    }

    fn float_fields(&self) -> [(&'static str, f64); 17] {
        [
            ("gamma_ratio", self.gamma_ratio),
            ("theta", self.theta),
            ("omega_init_over_lambda", self.omega_init_over_lambda),
            ("omega03_over_lambda", self.omega03_over_lambda),
            ("horizon_tau", self.horizon_tau),
            ("sample_step", self.sample_step),
            ("tol_abs", self.tol_abs),
            ("tol_rel", self.tol_rel),
            ("bisection_tol", self.bisection_tol),
            ("emulate_tol", self.emulate_tol),
            ("omega_cap", self.omega_cap),
            ("tau_required", self.tau_required),
            ("r_min", self.r_min),
            ("omega03_max_over_lambda", self.omega03_max_over_lambda),
            ("omega_init_max_over_lambda", self.omega_init_max_over_lambda),
            ("transient_fraction", self.transient_fraction),
            ("closure_tol", self.closure_tol),
        ]
    }

    fn apply_document(&mut self, doc: &str) -> Result<(), CliError> {
        let table: Table = doc
            .parse()
            .map_err(|e: toml::de::Error| CliError::Usage(format!("config document: {}", e.message())))?;
        for (key, value) in &table {
            self.apply_key(key, value)?;
        }
        Ok(())
    }

    fn apply_key(&mut self, key: &str, v: &Value) -> Result<(), CliError> {
        match key {
            "command" => {
                let name = string(key, v)?;
                if !Command::ALL.iter().any(|c| c.name() == name) {
                    return Err(CliError::Usage(format!("`command`: unknown command `{name}`")));
                }
            }
            "gamma_ratio" => self.gamma_ratio = number(key, v)?,
            "theta" => self.theta = number(key, v)?,
            "omega_init_over_lambda" => self.omega_init_over_lambda = number(key, v)?,
            "omega03_over_lambda" => self.omega03_over_lambda = number(key, v)?,
            "horizon_tau" => self.horizon_tau = number(key, v)?,
            "sample_step" => self.sample_step = number(key, v)?,
            "tol_abs" => self.tol_abs = number(key, v)?,
            "tol_rel" => self.tol_rel = number(key, v)?,
            "bisection_tol" => self.bisection_tol = number(key, v)?,
            "emulate_tol" => self.emulate_tol = number(key, v)?,
            "omega_cap" => self.omega_cap = number(key, v)?,
            "gamma_list" => self.gamma_list = Grid::from_value(key, v)?,
            "omega_init_grid" => self.omega_init_grid = Grid::from_value(key, v)?,
            "omega03_grid" => self.omega03_grid = Grid::from_value(key, v)?,
            "tau_required" => self.tau_required = number(key, v)?,
            "r_min" => self.r_min = number(key, v)?,
            "omega03_max_over_lambda" => self.omega03_max_over_lambda = number(key, v)?,
            "omega_init_max_over_lambda" => self.omega_init_max_over_lambda = number(key, v)?,
            "omega_init_points" => self.omega_init_points = count(key, v)?,
            "omega03_points" => self.omega03_points = count(key, v)?,
            "transient_fraction" => self.transient_fraction = number(key, v)?,
            "closure_tol" => self.closure_tol = number(key, v)?,
            "output" => self.output = Some(PathBuf::from(string(key, v)?)),
            "format" => {
                self.format = match string(key, v)?.as_str() {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    other => return Err(CliError::Usage(format!("`format`: unknown format `{other}`"))),
                }
            }
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    fn apply_flags(&mut self, f: Flags) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = f.$field { self.$field = v; })*
            };
        }
        take!(
            gamma_ratio,
            theta,
            omega_init_over_lambda,
            omega03_over_lambda,
            horizon_tau,
            sample_step,
            tol_abs,
            tol_rel,
            bisection_tol,
            emulate_tol,
            omega_cap,
            gamma_list,
            omega_init_grid,
            omega03_grid,
            tau_required,
            r_min,
            omega03_max_over_lambda,
            omega_init_max_over_lambda,
            omega_init_points,
            omega03_points,
            transient_fraction,
            closure_tol,
            format
        );
        if f.output.is_some() {
            self.output = f.output;
        }
    }
}

fn number(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::Usage(format!("`{key}`: expected a number"))),
    }
}

fn count(key: &str, v: &Value) -> Result<usize, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(CliError::Usage(format!("`{key}`: expected a non-negative integer"))),
    }
}

fn string(key: &str, v: &Value) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        _ => Err(CliError::Usage(format!("`{key}`: expected a string"))),
    }
}

/// Outcome of argument parsing.
#[derive(Debug)]
pub enum Parsed {
    Run(RunConfig),
    /// Help or version text; printed and exits successfully.
    Info(String),
}

/// Resolves a configuration from `argv` (program name first). A `doc` argument takes the place of
/// a `--config` file.
pub fn parse_config<I, S>(argv: I, doc: Option<&str>) -> Result<Parsed, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Parsed::Info(e.to_string())),
                _ => Err(CliError::Usage(e.render().to_string())),
            };
        }
    };
    let (command, flags) = cli.command.split();
    let mut config = RunConfig::defaults(command);
    let file_doc = match (&flags.config, doc) {
        (_, Some(d)) => Some(d.to_string()),
        (Some(path), None) => {
            Some(std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?)
        }
        (None, None) => None,
    };
    if let Some(d) = file_doc {
        config.apply_document(&d)?;
    }
    config.apply_flags(flags);
    config.validate()?;
    Ok(Parsed::Run(config))
}

/// Recovers the configuration document from the metadata block of an emitted CSV.
pub fn document_from_csv(csv: &str) -> String {
    let mut out = String::new();
    let mut inside = false;
    for line in csv.lines() {
        let Some(body) = line.strip_prefix('#') else {
            break;
        };
        let body = body.strip_prefix(' ').unwrap_or(body);
        match body {
            "[config]" => inside = true,
            b if b.starts_with('[') => inside = false,
            b if inside => {
                out.push_str(b);
                out.push('\n');
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<RunConfig, CliError> {
        match parse_config(std::iter::once("pt-forge").chain(args.iter().copied()), None)? {
            Parsed::Run(c) => Ok(c),
            Parsed::Info(_) => panic!("unexpected info"),
        }
    }

    #[test]
    fn reference_synth_flags() {
        let c = run(&[
            "synth",
            "--gamma-ratio",
            "0.5",
            "--omega-init-over-lambda",
            "0.05",
            "--omega03-over-lambda",
            "0",
            "--horizon-tau",
            "140",
        ])
        .unwrap();
        assert_eq!(c.command, Command::Synth);
        assert_eq!(c.gamma_ratio, 0.5);
        assert_eq!(c.omega_init_over_lambda, 0.05);
        assert_eq!(c.omega03_over_lambda, 0.0);
        assert_eq!(c.horizon_tau, 140.0);
        assert_eq!(c.theta, PI / 2.0);
    }

    #[test]
    fn broken_phase_is_usage_error() {
        let e = run(&["synth", "--gamma-ratio", "1.2"]).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("gamma_ratio"));
    }

    #[test]
    fn empty_argv_is_usage_error() {
        let e = parse_config(["pt-forge"], None).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("Usage"));
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config(["pt-forge", "synth"], Some("gamma = 0.3\n")).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("`gamma`"));
    }

    #[test]
    fn flags_override_document() {
        let Parsed::Run(c) = parse_config(
            ["pt-forge", "synth", "--gamma-ratio", "0.3"],
            Some("gamma_ratio = 0.8\nomega_init_over_lambda = 0.1\n"),
        )
        .unwrap() else {
            panic!()
        };
        assert_eq!(c.gamma_ratio, 0.3);
        assert_eq!(c.omega_init_over_lambda, 0.1);
    }

    #[test]
    fn grids_parse() {
        assert_eq!("0.1,0.2".parse::<Grid>().unwrap(), Grid::List(vec![0.1, 0.2]));
        assert_eq!(
            "log:0.01:1:3".parse::<Grid>().unwrap(),
            Grid::Log {
                min: 0.01,
                max: 1.0,
                count: 3
            }
        );
        assert!("cubic:0:1:3".parse::<Grid>().is_err());
        assert!(run(&["boundary", "--omega-init-grid", "0.2,0.1"]).is_err());
    }

    #[test]
    fn document_round_trip() {
        for cmd in Command::ALL {
            let mut c = RunConfig::defaults(cmd);
            c.gamma_ratio = 0.123456789012345;
            c.theta = 0.3;
            c.omega03_grid = Grid::Lin {
                min: 0.0,
                max: 2.0,
                count: 5,
            };
            c.output = Some("out/run.csv".into());
            let doc = c.to_document();
            let Parsed::Run(back) = parse_config(["pt-forge", cmd.name()], Some(&doc)).unwrap() else {
                panic!()
            };
            assert_eq!(back, c, "{doc}");
        }
    }
}
