//! `growthcal` command line.
//!
//! One subcommand per invocation. Reports go to stdout (or `--output`);
//! domain errors are written to stderr as a JSON object
//! `{code, module, message, location?}`. Exit status is 0 on success, 1 on
//! a domain or I/O error and 2 on a usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::accounting::{self, AlphaSpec};
use crate::calibrate::{self, FixedParams, GridSpec, MomentTargets, Weights};
use crate::data::{self, Column, YearRange};
use crate::error::Error;
use crate::model::{self, ModelParams};
use crate::report::{self, sig12};
use crate::simulate;

#[derive(Debug, Parser)]
#[command(
    name = "growthcal",
    version,
    about = "Growth accounting and steady-state calibration for annual macro panels",
    long_about = "Growth accounting and steady-state calibration for annual macro panels.\n\n\
Input panels are UTF-8 CSV with a header row containing at least \
year,output,capital,labor,consumption,investment (optional: tfp, labor_share). \
Years must be consecutive. Units are not checked beyond positivity: every \
result is a ratio or a log difference. Numbers in reports carry 12 significant digits."
)]
pub struct Cli {
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Report format. JSON by default; `simulate` defaults to CSV.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose cumulative log output growth into capital, labor and TFP
    /// contributions.
    Account(AccountArgs),
    /// Window mean and population standard deviation of one panel column.
    Stats(StatsArgs),
    /// List candidate steady-state windows where consumption and output grow
    /// at the same rate.
    Window(WindowArgs),
    /// Fit (beta, gamma) to I/Y and K/Y by exhaustive grid search.
    Calibrate(CalibrateArgs),
    /// Closed-form K/Y, I/Y and k_bar for (beta, gamma) rows read from CSV.
    Scenarios(ScenariosArgs),
    /// Closed-form steady state {g, k_bar, ky, iy}.
    SteadyState(SteadyStateArgs),
    /// Transition path in effective units, solved by shooting.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct AccountArgs {
    /// Panel CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Capital share. Defaults to 1 - mean(labor_share) when the panel has a
    /// labor_share column.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Years averaged for the labor share (START:END, default: whole panel).
    #[arg(long, conflicts_with = "alpha", value_name = "START:END")]
    pub share_window: Option<YearRange>,
    /// Comma-separated START:END periods (default: the full span).
    #[arg(long, value_name = "LIST")]
    pub ranges: Option<String>,
    /// Append calendar-decade rows (1960:1969, 1970:1979, ...) after the
    /// full-span row.
    #[arg(long, conflicts_with = "ranges")]
    pub decades: bool,
    /// With --decades, chain decades end-to-start (1960:1970, 1970:1980, ...)
    /// so they sum to the full span.
    #[arg(long, requires = "decades")]
    pub chained: bool,
    /// Also report compounded growth exp(growth) - 1 as `growth_pct`.
    #[arg(long)]
    pub percent: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Panel CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Column to summarize.
    #[arg(long, value_enum)]
    pub series: Column,
    /// Comma-separated START:END windows.
    #[arg(long, value_name = "LIST")]
    pub windows: String,
    /// Summarize annual log growth ln(x[t+1]/x[t]) instead of levels; the
    /// growth from t to t+1 is labelled with year t.
    #[arg(long)]
    pub log_growth: bool,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Panel CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Minimum window length in years.
    #[arg(long, default_value_t = data::DEFAULT_STEADY_MIN_LEN)]
    pub min_len: usize,
    /// Bound on the mean absolute gap between consumption and output log
    /// growth.
    #[arg(long, default_value_t = data::DEFAULT_STEADY_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct GrowthArgs {
    /// Balanced-growth rate g. Alternative to --a/--n.
    #[arg(long, conflicts_with_all = ["a", "n"], required_unless_present_all = ["a", "n"])]
    pub g: Option<f64>,
    /// Productivity growth rate a.
    #[arg(long, requires = "n", allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Labor growth rate n.
    #[arg(long, requires = "a", allow_hyphen_values = true)]
    pub n: Option<f64>,
}

impl GrowthArgs {
    fn g(&self, alpha: f64) -> Result<f64, Error> {
        match (self.g, self.a, self.n) {
            (Some(g), _, _) => Ok(g),
            (None, Some(a), Some(n)) => Ok(model::bgp_growth(a, n, alpha)?),
            _ => unreachable!("clap enforces g or a+n"),
        }
    }

    fn params(&self, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<ModelParams, Error> {
        Ok(match (self.g, self.a, self.n) {
            (Some(g), _, _) => ModelParams::with_rate(alpha, beta, gamma, delta, g)?,
            (None, Some(a), Some(n)) => ModelParams::new(alpha, beta, gamma, delta, a, n)?,
            _ => unreachable!("clap enforces g or a+n"),
        })
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Capital share alpha in (0, 1).
    #[arg(long)]
    pub alpha: f64,
    /// Discount factor beta in (0, 1).
    #[arg(long)]
    pub beta: f64,
    /// Relative risk aversion gamma > 0, gamma != 1.
    #[arg(long)]
    pub gamma: f64,
    /// Depreciation rate delta in (0, 1).
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub growth: GrowthArgs,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Error> {
        self.growth
            .params(self.alpha, self.beta, self.gamma, self.delta)
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Target investment-output ratio.
    #[arg(long, requires = "ky", conflicts_with = "input")]
    pub iy: Option<f64>,
    /// Target capital-output ratio.
    #[arg(long, requires = "iy", conflicts_with = "input")]
    pub ky: Option<f64>,
    /// Panel CSV to average the targets from (with --window).
    #[arg(long, requires = "window", required_unless_present = "iy")]
    pub input: Option<PathBuf>,
    /// Steady-state window START:END for the panel targets.
    #[arg(long, requires = "input", value_name = "START:END")]
    pub window: Option<YearRange>,
    /// Capital share alpha.
    #[arg(long)]
    pub alpha: f64,
    /// Depreciation rate delta.
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub growth: GrowthArgs,
    #[arg(long, default_value_t = GridSpec::default().beta_min)]
    pub beta_min: f64,
    #[arg(long, default_value_t = GridSpec::default().beta_max)]
    pub beta_max: f64,
    #[arg(long, default_value_t = GridSpec::default().beta_step)]
    pub beta_step: f64,
    #[arg(long, default_value_t = GridSpec::default().gamma_min)]
    pub gamma_min: f64,
    #[arg(long, default_value_t = GridSpec::default().gamma_max)]
    pub gamma_max: f64,
    /// Gamma grid step; points in (0.999, 1.001) are skipped.
    #[arg(long, default_value_t = GridSpec::default().gamma_step)]
    pub gamma_step: f64,
    /// Weight on the squared relative I/Y error.
    #[arg(long, default_value_t = 1.0)]
    pub w_iy: f64,
    /// Weight on the squared relative K/Y error.
    #[arg(long, default_value_t = 1.0)]
    pub w_ky: f64,
}

#[derive(Debug, Args)]
pub struct ScenariosArgs {
    /// CSV with `beta,gamma` columns, one scenario per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Capital share alpha.
    #[arg(long)]
    pub alpha: f64,
    /// Depreciation rate delta.
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub growth: GrowthArgs,
}

#[derive(Debug, Args)]
pub struct SteadyStateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Initial effective capital.
    #[arg(long, required_unless_present = "k0_mult", conflicts_with = "k0_mult")]
    pub k0: Option<f64>,
    /// Initial effective capital as a multiple of k_bar.
    #[arg(long)]
    pub k0_mult: Option<f64>,
    /// Number of periods T.
    #[arg(long, default_value_t = simulate::DEFAULT_HORIZON)]
    pub horizon: usize,
    /// Euler-gap tolerance; the path counts as converged when
    /// |k_T - k_bar|/k_bar < 10 * tol.
    #[arg(long, default_value_t = simulate::DEFAULT_TOL)]
    pub tol: f64,
}

/// Parses `argv` (including the program name), runs one subcommand and
/// returns the exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = stdout.write_all(text.as_bytes());
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        2
                    } else {
                        0
                    }
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, &text).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                }),
                None => stdout.write_all(text.as_bytes()).map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    message: e.to_string(),
                }),
            };
            match written {
                Ok(()) => 0,
                Err(e) => fail(&e, stderr),
            }
        }
        Err(e) => fail(&e, stderr),
    }
}

fn fail(e: &Error, stderr: &mut dyn Write) -> i32 {
    let _ = stderr.write_all(report::json(&e.to_object()).as_bytes());
    1
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn render<T: Serialize>(rows: &[T], format: Format) -> String {
    match format {
        Format::Json => report::json(rows),
        Format::Csv => report::csv(rows),
    }
}

fn execute(cli: &Cli) -> Result<String, Error> {
    let format = cli.format.unwrap_or(match cli.command {
        Command::Simulate(_) => Format::Csv,
        _ => Format::Json,
    });
    match &cli.command {
        Command::Account(args) => account(args, format),
        Command::Stats(args) => stats(args, format),
        Command::Window(args) => window(args, format),
        Command::Calibrate(args) => calibrate(args, format),
        Command::Scenarios(args) => scenarios(args, format),
        Command::SteadyState(args) => steady_state(args, format),
        Command::Simulate(args) => simulate(args, format),
    }
}

#[derive(Serialize)]
struct AccountRecord {
    start: i32,
    end: i32,
    growth: f64,
    capital: f64,
    labor: f64,
    tfp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth_pct: Option<f64>,
}

fn account(args: &AccountArgs, format: Format) -> Result<String, Error> {
    let panel = data::parse_panel(&read(&args.input)?)?;
    let alpha = match args.alpha {
        Some(a) => AlphaSpec::Fixed(a),
        None => AlphaSpec::FromLaborShare(args.share_window),
    };
    let ranges = match &args.ranges {
        Some(list) => YearRange::parse_list(list)?,
        None => {
            let mut r = vec![panel.span()];
            if args.decades {
                r.extend(accounting::decade_ranges(panel.span(), args.chained));
            }
            r
        }
    };
    let rows: Vec<AccountRecord> = accounting::accounting_table(&panel, alpha, &ranges)?
        .into_iter()
        .map(|r| AccountRecord {
            start: r.range.start,
            end: r.range.end,
            growth: sig12(r.growth),
            capital: sig12(r.contrib_capital),
            labor: sig12(r.contrib_labor),
            tfp: sig12(r.contrib_tfp),
            growth_pct: args.percent.then(|| sig12(r.percent_growth())),
        })
        .collect();
    Ok(render(&rows, format))
}

#[derive(Serialize)]
struct StatsRecord {
    start: i32,
    end: i32,
    mean: f64,
    std: f64,
}

fn stats(args: &StatsArgs, format: Format) -> Result<String, Error> {
    let panel = data::parse_panel(&read(&args.input)?)?;
    let series = panel.series(args.series).ok_or_else(|| {
        Error::Data(data::DataError::MissingColumn(
            args.series.name().to_string(),
        ))
    })?;
    let series = if args.log_growth {
        accounting::log_growth(&series)?
    } else {
        series
    };
    let windows = YearRange::parse_list(&args.windows)?;
    let rows: Vec<StatsRecord> = data::window_stats(&series, &windows)?
        .into_iter()
        .map(|w| StatsRecord {
            start: w.range.start,
            end: w.range.end,
            mean: sig12(w.mean),
            std: sig12(w.std),
        })
        .collect();
    Ok(render(&rows, format))
}

#[derive(Serialize)]
struct WindowRecord {
    start: i32,
    end: i32,
    length: usize,
    mean_gap: f64,
}

fn window(args: &WindowArgs, format: Format) -> Result<String, Error> {
    let panel = data::parse_panel(&read(&args.input)?)?;
    let rows: Vec<WindowRecord> = data::rank_steady_windows(&panel, args.min_len, args.tol)
        .into_iter()
        .map(|w| WindowRecord {
            start: w.range.start,
            end: w.range.end,
            length: w.range.len(),
            mean_gap: sig12(w.mean_gap),
        })
        .collect();
    Ok(render(&rows, format))
}

#[derive(Serialize)]
struct CalibrationRecord {
    beta: f64,
    gamma: f64,
    objective: f64,
    implied_iy: f64,
    implied_ky: f64,
    g: f64,
    k_bar: f64,
    ky: f64,
    iy: f64,
    infeasible_count: usize,
}

fn calibrate(args: &CalibrateArgs, format: Format) -> Result<String, Error> {
    let targets = match (&args.input, args.window, args.iy, args.ky) {
        (Some(path), Some(window), _, _) => {
            let panel = data::parse_panel(&read(path)?)?;
            calibrate::moments(&panel, window)?
        }
        (_, _, Some(iy), Some(ky)) => MomentTargets::new(iy, ky)?,
        _ => unreachable!("clap enforces targets"),
    };
    let fixed = FixedParams {
        alpha: args.alpha,
        delta: args.delta,
        g: args.growth.g(args.alpha)?,
    };
    let grid = GridSpec {
        beta_min: args.beta_min,
        beta_max: args.beta_max,
        beta_step: args.beta_step,
        gamma_min: args.gamma_min,
        gamma_max: args.gamma_max,
        gamma_step: args.gamma_step,
    };
    let weights = Weights {
        iy: args.w_iy,
        ky: args.w_ky,
    };
    let r = calibrate::grid_search(&targets, &grid, &fixed, &weights)?;
    let record = CalibrationRecord {
        beta: sig12(r.beta),
        gamma: sig12(r.gamma),
        objective: sig12(r.objective),
        implied_iy: sig12(r.implied_iy),
        implied_ky: sig12(r.implied_ky),
        g: sig12(r.steady_state.g),
        k_bar: sig12(r.steady_state.k_bar),
        ky: sig12(r.steady_state.ky),
        iy: sig12(r.steady_state.iy),
        infeasible_count: r.infeasible_count,
    };
    Ok(match format {
        Format::Json => report::json(&record),
        Format::Csv => report::csv(&[record]),
    })
}

#[derive(Serialize)]
struct ScenarioRecord {
    beta: f64,
    gamma: f64,
    ky: Option<f64>,
    iy: Option<f64>,
    k_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<crate::error::ErrorObject>,
}

#[derive(Serialize)]
struct CsvScenarioRecord {
    beta: f64,
    gamma: f64,
    ky: Option<f64>,
    iy: Option<f64>,
    k_bar: Option<f64>,
    error: Option<String>,
}

fn read_scenarios(text: &str) -> Result<Vec<(f64, f64)>, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| data::DataError::Csv(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| data::DataError::MissingColumn(name.into()))
    };
    let (bi, gi) = (col("beta")?, col("gamma")?);
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| data::DataError::Csv(e.to_string()))?;
        let cell = |idx: usize, name: &str| -> Result<f64, data::DataError> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse().map_err(|_| data::DataError::NonNumeric {
                line: row + 2,
                column: name.into(),
                value: raw.into(),
            })
        };
        out.push((cell(bi, "beta")?, cell(gi, "gamma")?));
    }
    Ok(out)
}

fn scenarios(args: &ScenariosArgs, format: Format) -> Result<String, Error> {
    let scenarios = read_scenarios(&read(&args.input)?)?;
    let fixed = FixedParams {
        alpha: args.alpha,
        delta: args.delta,
        g: args.growth.g(args.alpha)?,
    };
    let rows = calibrate::scenario_table(&scenarios, &fixed);
    let records: Vec<ScenarioRecord> = scenarios
        .iter()
        .zip(rows)
        .map(|(&(beta, gamma), row)| match row {
            Ok(r) => ScenarioRecord {
                beta: sig12(beta),
                gamma: sig12(gamma),
                ky: Some(sig12(r.ky)),
                iy: Some(sig12(r.iy)),
                k_bar: Some(sig12(r.k_bar)),
                error: None,
            },
            Err(e) => ScenarioRecord {
                beta: sig12(beta),
                gamma: sig12(gamma),
                ky: None,
                iy: None,
                k_bar: None,
                error: Some(Error::from(e).to_object()),
            },
        })
        .collect();
    Ok(match format {
        Format::Json => report::json(&records),
        Format::Csv => {
            let flat: Vec<CsvScenarioRecord> = records
                .into_iter()
                .map(|r| CsvScenarioRecord {
                    beta: r.beta,
                    gamma: r.gamma,
                    ky: r.ky,
                    iy: r.iy,
                    k_bar: r.k_bar,
                    error: r.error.map(|e| e.code),
                })
                .collect();
            report::csv(&flat)
        }
    })
}

#[derive(Serialize)]
struct SteadyStateRecord {
    g: f64,
    k_bar: f64,
    ky: f64,
    iy: f64,
}

fn steady_state(args: &SteadyStateArgs, format: Format) -> Result<String, Error> {
    let ss = model::steady_state_k(&args.model.params()?)?;
    let record = SteadyStateRecord {
        g: sig12(ss.g),
        k_bar: sig12(ss.k_bar),
        ky: sig12(ss.ky),
        iy: sig12(ss.iy),
    };
    Ok(match format {
        Format::Json => report::json(&record),
        Format::Csv => report::csv(&[record]),
    })
}

#[derive(Serialize)]
struct PathRecord {
    t: usize,
    k: f64,
    c: Option<f64>,
    y: Option<f64>,
    i: Option<f64>,
    euler_gap: Option<f64>,
}

#[derive(Serialize)]
struct PathReport {
    horizon: usize,
    k_bar: f64,
    converged: bool,
    terminal_error: f64,
    max_euler_gap: f64,
    path: Vec<PathRecord>,
}

fn simulate(args: &SimulateArgs, format: Format) -> Result<String, Error> {
    let p = args.model.params()?;
    let k0 = match (args.k0, args.k0_mult) {
        (Some(k0), _) => k0,
        (None, Some(m)) => m * model::steady_state_k(&p)?.k_bar,
        _ => unreachable!("clap enforces k0 or k0-mult"),
    };
    let path = simulate::simulate_transition(k0, &p, args.horizon, args.tol)?;
    let records: Vec<PathRecord> = (0..=path.horizon)
        .map(|t| PathRecord {
            t,
            k: sig12(path.k[t]),
            c: path.c.get(t).copied().map(sig12),
            y: path.y.get(t).copied().map(sig12),
            i: path.i.get(t).copied().map(sig12),
            euler_gap: path.euler_gaps.get(t).copied().map(sig12),
        })
        .collect();
    Ok(match format {
        Format::Csv => report::csv(&records),
        Format::Json => report::json(&PathReport {
            horizon: path.horizon,
            k_bar: sig12(path.k_bar),
            converged: path.converged,
            terminal_error: sig12(path.terminal_error),
            max_euler_gap: sig12(path.max_euler_gap()),
            path: records,
        }),
    })
}

/// Markdown reference of every subcommand's `--help`, defaults included.
pub fn reference_markdown() -> String {
    let mut cmd = Cli::command().term_width(100);
    let mut out = String::from("# growthcal command reference\n\n");
    out.push_str("Generated from the command-line definitions; do not edit by hand.\n\n");
    out.push_str("```text\n");
    out.push_str(&cmd.render_long_help().to_string());
    out.push_str("```\n");
    let names: Vec<String> = cmd
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .filter(|n| n != "help")
        .collect();
    for name in names {
        let sub = cmd
            .find_subcommand_mut(&name)
            .expect("listed subcommand exists");
        let mut sub = sub.clone().bin_name(format!("growthcal {name}"));
        out.push_str(&format!("\n## {name}\n\n```text\n"));
        out.push_str(&sub.render_long_help().to_string());
        out.push_str("```\n");
    }
    out
}
