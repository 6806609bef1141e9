//! `spinladder` command-line front end.
//!
//! Exit codes: 0 success, 1 validation error, 2 convergence failure,
//! 3 acceptance failure, 4 I/O error. Every failure also prints one
//! `error: kind=<kind> code=<n> message=<text>` line on standard error.

pub mod config;
pub mod output;
pub mod plot;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use spinladder_core::acceptance::{Suite, ALL_CRITERIA, QUICK_CRITERIA};
use spinladder_core::analysis::{sweep, SweepAxis};

use crate::config::{parse_config, ConfigError, SimulationConfig};
use crate::output::{file_entry, format_sweep_csv, io_err, json_f64, write_csv, write_manifest, IoError};
use crate::plot::{emit_plot_script, Normalization, PlotError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] spinladder_core::Error),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_convergence() => 2,
            CliError::Acceptance(_) => 3,
            CliError::Io(_) => 4,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "convergence",
            3 => "acceptance",
            4 => "io",
            _ => "validation",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spinladder", version, about = "Spin-S ladder-drive dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one configuration: trajectory CSV plus manifest.
    Simulate(SimulateArgs),
    /// Vary one parameter of a configuration: table CSV plus per-row manifests.
    Sweep(SweepArgs),
    /// Run the acceptance checklist and print one line per criterion.
    Check(CheckArgs),
    /// Print a gnuplot script for a trajectory CSV.
    PlotScript(PlotArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: the config's output_dir, else ./runs/<timestamp-label>).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add one p_<m> population column per level.
    #[arg(long)]
    pub populations: bool,
    /// Skip the dt/2 rerun that measures step-halving convergence.
    #[arg(long)]
    pub skip_convergence: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// One of h_ac, d, hz, s, s_prime.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated values.
    #[arg(long)]
    pub values: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also rerun each row at dt/2 and report the deviation.
    #[arg(long)]
    pub convergence: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Only the fast criteria.
    #[arg(long)]
    pub quick: bool,
    /// Comma-separated criterion numbers.
    #[arg(long, conflicts_with = "quick")]
    pub only: Option<String>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long)]
    pub csv: PathBuf,
    /// Comma-separated column names, e.g. sx,sz.
    #[arg(long, default_value = "sx,sz")]
    pub columns: String,
    /// none, s or s2.
    #[arg(long, default_value = "s")]
    pub normalize: String,
    /// Write the script here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: kind={} code={code} message={message}", e.kind());
            code
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Sweep(a) => run_sweep(&a),
        Command::Check(a) => check(&a),
        Command::PlotScript(a) => plot_script(&a),
    }
}

fn load_config(path: &Path) -> Result<SimulationConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(parse_config(&text)?)
}

fn output_dir(out: &Option<PathBuf>, config: &SimulationConfig, label: &str) -> Result<PathBuf, CliError> {
    let dir = match (out, &config.output_dir) {
        (Some(d), _) | (None, Some(d)) => d.clone(),
        (None, None) => {
            let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S");
            let safe: String =
                label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
            PathBuf::from("runs").join(format!("{stamp}-{safe}"))
        }
    };
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

fn config_json(config: &SimulationConfig) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> =
        config.pairs().into_iter().map(|(k, v)| (k, serde_json::Value::String(v))).collect();
    serde_json::Value::Object(map)
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let config = load_config(&args.config)?;
    let spec = config.run_spec();
    let label = spec.protocol()?.label;
    let result = spec.run(!args.skip_convergence)?;
    let dir = output_dir(&args.out, &config, &label)?;

    write_csv(&result.series, &dir.join("trajectory.csv"), args.populations)?;
    let period = result.period();
    let resolved = result.trajectory.config;
    let min_sz = result.series.sz.iter().copied().fold(f64::INFINITY, f64::min);
    let manifest = json!({
        "config": config_json(&config),
        "code_version": env!("CARGO_PKG_VERSION"),
        "protocol_label": label,
        "method": resolved.method.as_str(),
        "dt": resolved.dt,
        "record_stride": resolved.record_stride,
        "t_end": resolved.t_max,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "convergence_report": result.convergence.map(json_f64),
        "derived": {
            "period": period.as_ref().ok().map(|p| json_f64(p.period)),
            "period_error": period.as_ref().err().map(|e| e.to_string()),
            "min_sz": json_f64(min_sz),
            "min_sz_reduced": json_f64(result.series.min_reduced_sz()),
            "max_norm_drift": json_f64(result.trajectory.max_norm_drift),
            "casimir_deviation": json_f64(result.series.casimir_deviation()),
        },
        "files": [file_entry(&dir, "trajectory.csv")?],
    });
    let path = write_manifest(&dir, &manifest)?;
    println!("{}", dir.join("trajectory.csv").display());
    println!("{}", path.display());
    Ok(())
}

fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("--values: malformed number '{}'", v.trim())))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("--values is empty".into()));
    }
    Ok(values)
}

fn run_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let config = load_config(&args.config)?;
    let axis: SweepAxis = args.axis.parse()?;
    let values = parse_values(&args.values)?;
    let base = config.run_spec();
    let label = format!("sweep-{}", axis.as_str());
    let rows = sweep(&base, axis, &values, args.convergence);
    let dir = output_dir(&args.out, &config, &label)?;

    let table = dir.join("sweep.csv");
    fs::write(&table, format_sweep_csv(&rows)).map_err(io_err(&table))?;
    let mut files = vec![file_entry(&dir, "sweep.csv")?];
    for (i, row) in rows.iter().enumerate() {
        let row_dir_name = format!("row_{i:03}");
        let row_dir = dir.join(&row_dir_name);
        fs::create_dir_all(&row_dir).map_err(io_err(&row_dir))?;
        let summary = match &row.outcome {
            Ok(s) => json!({
                "period": s.period.as_ref().ok().map(|p| json_f64(p.period)),
                "period_error": s.period.as_ref().err().map(|e| e.to_string()),
                "min_sz_reduced": json_f64(s.min_reduced_sz),
                "max_norm_drift": json_f64(s.max_norm_drift),
                "casimir_deviation": json_f64(s.casimir_deviation),
                "convergence_report": s.convergence.map(json_f64),
            }),
            Err(e) => {
                eprintln!("warning: row {i} ({}={}) failed: {e}", axis.as_str(), row.value);
                json!({ "error": e.to_string() })
            }
        };
        let manifest = json!({
            "config": config_json(&config),
            "axis": axis.as_str(),
            "value": json_f64(row.value),
            "code_version": env!("CARGO_PKG_VERSION"),
            "derived": summary,
            "files": [],
        });
        write_manifest(&row_dir, &manifest)?;
        files.push(file_entry(&dir, &format!("{row_dir_name}/manifest.json"))?);
    }
    let manifest = json!({
        "config": config_json(&config),
        "axis": axis.as_str(),
        "values": values.iter().map(|v| json_f64(*v)).collect::<Vec<_>>(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": started.elapsed().as_secs_f64(),
        "files": files,
    });
    write_manifest(&dir, &manifest)?;
    println!("{}", table.display());
    Ok(())
}

fn check(args: &CheckArgs) -> Result<(), CliError> {
    let ids: Vec<u8> = match (&args.only, args.quick) {
        (Some(list), _) => list
            .split(',')
            .map(|v| match v.trim().parse::<u8>() {
                Ok(id) if ALL_CRITERIA.contains(&id) => Ok(id),
                _ => Err(CliError::Usage(format!("--only: no criterion '{}'", v.trim()))),
            })
            .collect::<Result<_, _>>()?,
        (None, true) => QUICK_CRITERIA.to_vec(),
        (None, false) => ALL_CRITERIA.to_vec(),
    };
    let results = Suite::new()
        .with_reporter(|r| {
            println!("{r}");
            let _ = std::io::stdout().flush();
        })
        .run_all(&ids);
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(format!("failed criteria {}", failed.join(","))))
    }
}

/// S from the first data row's `stotal = S(S+1)`.
fn spin_from_csv(text: &str) -> Option<f64> {
    let header: Vec<&str> = text.lines().next()?.split(',').collect();
    let col = header.iter().position(|h| *h == "stotal")?;
    let row = text.lines().nth(1)?;
    let total: f64 = row.split(',').nth(col)?.parse().ok()?;
    Some(((-1.0 + (1.0 + 4.0 * total).sqrt()) * 0.5 * 2.0).round() / 2.0)
}

fn plot_script(args: &PlotArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.csv).map_err(io_err(&args.csv))?;
    let norm: Normalization = args.normalize.parse().map_err(CliError::Usage)?;
    let columns: Vec<String> =
        args.columns.split(',').map(str::trim).filter(|c| !c.is_empty()).map(String::from).collect();
    let s = match norm {
        Normalization::None => 1.0,
        _ => spin_from_csv(&text).ok_or_else(|| CliError::Usage("cannot infer S: csv has no stotal data".into()))?,
    };
    let header = text.lines().next().unwrap_or("");
    let script = emit_plot_script(&args.csv.display().to_string(), header, &columns, norm, s)?;
    match &args.output {
        Some(path) => fs::write(path, script).map_err(io_err(path))?,
        None => print!("{script}"),
    }
    Ok(())
}
