use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use manet_core::scenario::run_with;
use manet_core::ProtocolKind;
use manet_lab::report::{aggregate, write_csv, ResultRow};
use manet_lab::scenario_file::{parse_file, parse_protocol_list, render, ScenarioError, ScenarioFile};
use manet_lab::sweep::{effective_jobs, run_sweep, Axis, SweepPlan, DEFAULT_RATES};

#[derive(Parser)]
#[command(name = "manet-lab", version, about = "Run MANET routing experiments from scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (once per protocol given).
    Run {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated protocol list; defaults to the file's protocol.
        #[arg(long)]
        protocol: Option<String>,
        /// Directory for results.csv, scenario.scn and traces.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the full event log of each run (needs --out).
        #[arg(long)]
        dump_trace: bool,
    },
    /// Sweep one parameter over a list of values with replications.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        axis: Option<Axis>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<String>>,
        #[arg(long)]
        reps: Option<u32>,
        /// Comma-separated protocol list (default aodv,gpsr,crp).
        #[arg(long)]
        protocols: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario file, then print every setting.
    Validate { file: PathBuf },
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load(path: &Path) -> Result<ScenarioFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    parse_file(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn commented(text: &str) -> String {
    text.lines().map(|l| format!("# {l}\n")).collect()
}

fn run(
    file: &Path,
    seed: Option<u64>,
    protocol: Option<String>,
    out: Option<PathBuf>,
    dump_trace: bool,
) -> Result<(), Failure> {
    let mut base = load(file)?.scenario;
    if let Some(s) = seed {
        base.seed = s;
    }
    let protocols = match protocol {
        Some(p) => parse_protocol_list(&p)?,
        None => vec![base.protocol],
    };
    if dump_trace && out.is_none() {
        return Err(Failure::Invalid("--dump-trace needs --out".into()));
    }
    eprint!("{}", commented(&render(&base)));
    let mut rows = Vec::new();
    for protocol in protocols {
        let sc = manet_core::Scenario { protocol, ..base.clone() };
        sc.validate().map_err(ScenarioError::from)?;
        let output = run_with(&sc, sc.traces(), sc.streams(), dump_trace).map_err(runtime)?;
        if let (Some(dir), Some(log)) = (&out, &output.log) {
            fs::create_dir_all(dir).map_err(runtime)?;
            let mut text = String::new();
            for rec in log {
                text.push_str(&format!("{rec:?}\n"));
            }
            fs::write(dir.join(format!("trace_{}.log", protocol.name())), text).map_err(runtime)?;
        }
        rows.push(ResultRow::from(&output.row));
    }
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir).map_err(runtime)?;
            fs::write(dir.join("scenario.scn"), render(&base)).map_err(runtime)?;
            let f = fs::File::create(dir.join("results.csv")).map_err(runtime)?;
            write_csv(&rows, f).map_err(runtime)?;
        }
        None => write_csv(&rows, io::stdout().lock()).map_err(runtime)?,
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    file: &Path,
    axis: Option<Axis>,
    values: Option<Vec<String>>,
    reps: Option<u32>,
    protocols: Option<String>,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let ScenarioFile { mut scenario, sweep: defaults } = load(file)?;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let axis = axis.or(defaults.axis).ok_or_else(|| Failure::Invalid("no sweep axis given (--axis)".into()))?;
    let values = match values.or(defaults.values) {
        Some(v) => v,
        None if axis == Axis::Rate => DEFAULT_RATES.iter().map(f64::to_string).collect(),
        None => return Err(Failure::Invalid("no axis values given (--values)".into())),
    };
    let protocols = match protocols {
        Some(p) => parse_protocol_list(&p)?,
        None => defaults.protocols.unwrap_or_else(|| vec![ProtocolKind::Aodv, ProtocolKind::Gpsr, ProtocolKind::Crp]),
    };
    let plan = SweepPlan { base: scenario, axis, values, replications: reps.or(defaults.reps).unwrap_or(1), protocols };
    let jobs = effective_jobs(jobs);
    eprint!("{}", commented(&render(&plan.base)));
    eprintln!("# sweep {} over {:?}, {} replication(s), {} job(s)", plan.axis, plan.values, plan.replications, jobs);
    let result = run_sweep(&plan, jobs)?;
    for f in &result.failures {
        eprintln!("run failed: {}={} protocol={} seed={}: {}", plan.axis, f.axis_value, f.protocol, f.seed, f.error);
    }
    let rows: Vec<ResultRow> = result.rows.iter().map(ResultRow::from).collect();
    let table = aggregate(&rows, plan.axis).render();
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir).map_err(runtime)?;
            fs::write(dir.join("scenario.scn"), render(&plan.base)).map_err(runtime)?;
            let f = fs::File::create(dir.join("rows.csv")).map_err(runtime)?;
            write_csv(&rows, f).map_err(runtime)?;
            fs::write(dir.join("table.txt"), &table).map_err(runtime)?;
            print!("{table}");
        }
        None => {
            write_csv(&rows, io::stdout().lock()).map_err(runtime)?;
            eprint!("\n{table}");
        }
    }
    eprintln!("# {} rows, {} failed runs", rows.len(), result.failures.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { file, seed, protocol, out, dump_trace } => run(&file, seed, protocol, out, dump_trace),
        Command::Sweep { file, axis, values, reps, protocols, seed, jobs, out } => {
            sweep(&file, axis, values, reps, protocols, seed, jobs, out)
        }
        Command::Validate { file } => load(&file).map(|f| {
            let _ = io::stdout().write_all(render(&f.scenario).as_bytes());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
