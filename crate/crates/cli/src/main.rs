use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use fglab_cli::{collect_paths, load_scenario, run_scenario, Report, Scenario, Task, Verdict};
use serde_json::Value;

#[derive(Parser)]
#[command(name = "fglab", version, about = "Formal group laws, level structures and isogenies over Artinian rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report(s) here instead of stdout; a directory receives one file per scenario.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit 0 even when a certificate fails.
    #[arg(long, global = true)]
    report_only: bool,
    /// Record wall-clock time in each report (breaks byte-for-byte reproducibility).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files or directories of them.
    Run {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    FglAxioms(Flags),
    Nseries(Flags),
    Level(Flags),
    Quotient(Flags),
    Stagewise(Flags),
    CoherenceCoord(Flags),
    ThetaCheck(Flags),
    Rnorm(Flags),
    CoherenceTheta(Flags),
    CharInjectivity(Flags),
    Discriminant(Flags),
}

#[derive(Args, Clone)]
struct Flags {
    #[arg(long)]
    p: u64,
    #[arg(long = "N")]
    n: u32,
    #[arg(long = "D", default_value_t = 10)]
    cap: usize,
    #[arg(long, default_value = "mult")]
    group: String,
    #[arg(long = "A")]
    a: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    psi: Option<String>,
    /// Coordinate s(x1) in series text form.
    #[arg(long)]
    section: Option<String>,
    /// Unit series for theta-check.
    #[arg(long)]
    unit: Option<String>,
    /// Multipliers for nseries.
    #[arg(long = "n", value_delimiter = ',', allow_hyphen_values = true)]
    n_values: Vec<i64>,
    #[arg(long)]
    range: Option<i64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    b: Option<u64>,
}

impl Flags {
    fn scenario(self, task: Task) -> Scenario {
        let mut s = Scenario::new(task, self.p, self.n);
        s.cap = self.cap;
        s.group = self.group;
        s.a = self.a;
        s.k = self.k;
        s.psi = self.psi;
        s.section = self.section;
        s.unit = self.unit;
        s.n_values = (!self.n_values.is_empty()).then_some(fglab_cli::scenario::Ints::Many(self.n_values));
        s.range = self.range;
        s.m = self.m;
        s.b = self.b;
        s
    }
}

fn run_all(paths: &[PathBuf], jobs: usize, timing: bool) -> Vec<(PathBuf, Report)> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Report>>> = Mutex::new(vec![None; paths.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, paths.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = paths.get(i) else { break };
                let report = match load_scenario(path) {
                    Ok(s) => run_scenario(&s, timing),
                    Err(e) => malformed(path, &e),
                };
                results.lock().expect("results")[i] = Some(report);
            });
        }
    });
    let results = results.into_inner().expect("results");
    paths.iter().cloned().zip(results.into_iter().map(|r| r.expect("every scenario ran"))).collect()
}

fn malformed(path: &Path, e: &anyhow::Error) -> Report {
    let mut s = Scenario::new(Task::FglAxioms, 0, 0);
    s.name = Some(path.display().to_string());
    Report::failed(&s, format!("{e:#}"))
}

fn emit(cli: &Cli, reports: &[(PathBuf, Report)], single: bool) -> anyhow::Result<()> {
    if let Some(out) = &cli.out {
        if out.is_dir() {
            for (path, r) in reports {
                let stem = path.file_stem().map(|s| s.to_owned()).unwrap_or_else(|| "report".into());
                std::fs::write(out.join(stem).with_extension("json"), r.to_json())?;
            }
            return Ok(());
        }
    }
    let body = if single {
        reports[0].1.to_json()
    } else {
        let all: Vec<Value> = reports.iter().map(|(_, r)| serde_json::to_value(r).expect("report")).collect();
        let mut s = serde_json::to_string_pretty(&all)?;
        s.push('\n');
        s
    };
    match &cli.out {
        Some(out) => std::fs::write(out, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (reports, single) = match &cli.command {
        Command::Run { paths, jobs } => match collect_paths(paths) {
            Ok(found) if !found.is_empty() => {
                let single = found.len() == 1 && !paths[0].is_dir();
                (run_all(&found, *jobs, cli.timing), single)
            }
            Ok(_) => {
                eprintln!("fglab: no scenario files found");
                return ExitCode::from(2);
            }
            Err(e) => {
                eprintln!("fglab: {e:#}");
                return ExitCode::from(2);
            }
        },
        cmd => {
            let (task, flags) = flag_command(cmd);
            let s = flags.scenario(task);
            (vec![(PathBuf::from(task.to_string()), run_scenario(&s, cli.timing))], true)
        }
    };
    for (_, r) in &reports {
        if let (Some(e), Verdict::Error) = (&r.error, r.verdict) {
            eprintln!("fglab: {e}");
        }
    }
    if let Err(e) = emit(&cli, &reports, single) {
        eprintln!("fglab: {e:#}");
        return ExitCode::from(2);
    }
    let code = reports.iter().map(|(_, r)| r.exit_code(cli.report_only)).max().unwrap_or(0);
    ExitCode::from(code)
}

fn flag_command(cmd: &Command) -> (Task, Flags) {
    let (task, f) = match cmd {
        Command::FglAxioms(f) => (Task::FglAxioms, f),
        Command::Nseries(f) => (Task::Nseries, f),
        Command::Level(f) => (Task::Level, f),
        Command::Quotient(f) => (Task::Quotient, f),
        Command::Stagewise(f) => (Task::Stagewise, f),
        Command::CoherenceCoord(f) => (Task::CoherenceCoord, f),
        Command::ThetaCheck(f) => (Task::ThetaCheck, f),
        Command::Rnorm(f) => (Task::Rnorm, f),
        Command::CoherenceTheta(f) => (Task::CoherenceTheta, f),
        Command::CharInjectivity(f) => (Task::CharInjectivity, f),
        Command::Discriminant(f) => (Task::Discriminant, f),
        Command::Run { .. } => unreachable!("handled by the caller"),
    };
    (task, f.clone())
}
