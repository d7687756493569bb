//! Command-line front end. `main.rs` only forwards `argv` to [`main_with_args`].
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 on runtime
//! failures.

pub mod config;
pub mod field;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::sim::{metrics, run, MetricTolerances, TrajectoryRecord};
use config::{parse_config, serialize_config, to_config, ParsedConfig, SIM1_CFG, SIM2_CFG};
use field::{sample_field, write_field_csv, Axis, FieldError, FieldSampleGrid};
use output::write_trajectory_csv;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ncgvf",
    version,
    about = "Non-singular cooperative guiding vector field simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario file and write trajectory CSVs.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integration step in seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Final time in seconds.
        #[arg(long = "t-end")]
        t_end: Option<f64>,
    },
    /// Sample the field of a scenario on a grid.
    Field {
        config: PathBuf,
        /// Comma-separated axes, each `lo:hi:n` or a fixed value.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Comma-separated θ slices.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        theta: String,
        /// Time at which the target frame is frozen, in seconds.
        #[arg(long, default_value_t = 0.0)]
        time: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in property suite.
    Check,
    /// Run a bundled scenario.
    Demo {
        which: Demo,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Sim1,
    Sim2,
}

struct Failure {
    code: i32,
    message: String,
}

fn invalid(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.to_string(),
    }
}

fn runtime(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: message.to_string(),
    }
}

fn load(path: &Path) -> Result<ParsedConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write_outputs(
    parsed: &ParsedConfig,
    record: &TrajectoryRecord<f64>,
    out: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let dir = out
        .or_else(|| parsed.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let stem = parsed.output.name.clone().unwrap_or_else(|| parsed.name.clone());
    let (traj, edges) = write_trajectory_csv(record, &dir.join(format!("{stem}.csv"))).map_err(runtime)?;
    let doc = to_config(&parsed.name, &parsed.scenario, &parsed.output)
        .and_then(|c| serialize_config(&c))
        .map_err(runtime)?;
    let cfg_path = dir.join(format!("{stem}_scenario.cfg"));
    fs::write(&cfg_path, doc).map_err(|e| runtime(format!("{}: {e}", cfg_path.display())))?;
    let _ = writeln!(
        stdout,
        "wrote {}, {}, {}",
        traj.display(),
        edges.display(),
        cfg_path.display()
    );
    Ok(())
}

fn report(record: &TrajectoryRecord<f64>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let m = metrics(record, MetricTolerances::default()).map_err(runtime)?;
    let h = &record.header;
    let _ = writeln!(
        stdout,
        "{} agents, {}-D, dt = {} s, t_end = {} s, {} steps, g = {}, k_c = {}, case {:?}",
        h.agents, h.dim, h.dt, h.t_end, h.steps, h.g, h.k_c, h.gain_case
    );
    for (i, (fin, settle)) in m.final_phi_sq.iter().zip(&m.time_to_tolerance).enumerate() {
        let settle = settle.map_or("never".to_string(), |t| format!("{t} s"));
        let _ = writeln!(
            stdout,
            "agent {}: final |Phi|^2 = {fin:.3e}, below 1e-4 from {settle}",
            i + 1
        );
    }
    for (&(i, j), e) in h.edges.iter().zip(&m.final_edge_errors) {
        let _ = writeln!(stdout, "edge ({}, {}): final theta error = {e:.3e} rad", i + 1, j + 1);
    }
    if let Some(t) = m.time_to_coordination {
        let _ = writeln!(stdout, "edge errors below 1e-2 rad from {t} s");
    }
    if let Some(rise) = m.max_composite_rise {
        let _ = writeln!(stdout, "max one-step rise of composite V: {rise:.3e}");
    }
    Ok(())
}

fn simulate(parsed: ParsedConfig, out: Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let record = run(&parsed.scenario).map_err(|e| if e.is_validation() { invalid(&e) } else { runtime(&e) })?;
    report(&record, stdout)?;
    write_outputs(&parsed, &record, out, stdout)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| invalid(format!("bad {what} entry `{p}`")))
        })
        .collect()
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out, dt, t_end } => {
            let mut parsed = load(&config)?;
            if let Some(dt) = dt {
                parsed.scenario.dt = dt;
            }
            if let Some(t_end) = t_end {
                parsed.scenario.t_end = t_end;
            }
            parsed.scenario.validate().map_err(invalid)?;
            simulate(parsed, out, stdout)
        }
        Command::Demo { which, out } => {
            let text = match which {
                Demo::Sim1 => SIM1_CFG,
                Demo::Sim2 => SIM2_CFG,
            };
            let parsed = parse_config(text).map_err(runtime)?;
            simulate(parsed, out, stdout)
        }
        Command::Field {
            config,
            grid,
            theta,
            time,
            out,
        } => {
            let parsed = load(&config)?;
            let axes = grid
                .split(',')
                .map(str::parse::<Axis>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(invalid)?;
            let grid = FieldSampleGrid {
                axes,
                thetas: parse_list(&theta, "theta")?,
                time,
            };
            let samples = sample_field(&parsed.scenario, &grid).map_err(|e| match e {
                FieldError::Grid(_) => invalid(e),
                _ => runtime(e),
            })?;
            write_field_csv(&samples, &out).map_err(runtime)?;
            let min = samples.min_norm.map_or("n/a".into(), |m| format!("{m:.6}"));
            let _ = writeln!(
                stdout,
                "{} samples, {} flagged singular, min field norm {min}; wrote {}",
                samples.rows.len(),
                samples.flagged,
                out.display()
            );
            Ok(())
        }
        Command::Check => {
            let results = crate::verify::run_checks();
            let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(stdout, "{status}  {:width$}  {}", r.name, r.detail);
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(runtime(format!("{failed} of {} checks failed", results.len())))
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
