//! `tiips`: generate benchmark tasks, run solvers over them and report metrics.

mod config;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use tiips_core::benchgen::{self, DatasetError, SampleConfig, Split, TaskRecord};
use tiips_core::engine::{self, Models, Outcome, SolverConfig};
use tiips_core::inductive::{Enumerator, InductiveModel};
use tiips_core::metrics;
use tiips_core::protocol::{self, OracleStub, Session, SharedSession};
use tiips_core::transductive::{HeuristicModel, OracleModel, TransductiveModel};

use config::{Binding, FileConfig, RunConfig};

#[derive(Parser)]
#[command(name = "tiips", version, about = "Programming-by-example synthesis with sparse subgoal guidance")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write train and test task files for each requested category.
    Gen(RunArgs),
    /// Run a solver over task files and write one trace per task.
    Solve(RunArgs),
    /// Summarize trace files into CSV reports.
    Report(ReportArgs),
    /// Oracle-backed external model speaking the wire protocol on stdin/stdout.
    #[command(hide = true)]
    StubModel(StubArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML file with defaults for any of the options below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    domain: Option<String>,
    /// Category name, comma list or `all` (the five generalization categories).
    #[arg(long = "category")]
    categories: Vec<String>,
    /// tiips, exedec or baseline.
    #[arg(long)]
    solver: Option<String>,
    /// builtin or cmd:<command line>.
    #[arg(long)]
    inductive: Option<String>,
    /// oracle, heuristic or cmd:<command line>.
    #[arg(long)]
    transductive: Option<String>,
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long)]
    step_limit: Option<usize>,
    #[arg(long)]
    inner_k: Option<usize>,
    #[arg(long)]
    outer_t: Option<usize>,
    /// Seconds per solve.
    #[arg(long)]
    wall_clock_cap: Option<f64>,
    /// Seconds to wait for an external model response.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Test tasks per category (gen).
    #[arg(long)]
    count: Option<usize>,
    /// Train tasks per category (gen); defaults to --count.
    #[arg(long)]
    train_count: Option<usize>,
    /// Task files (solve).
    #[arg(long)]
    tasks: Vec<PathBuf>,
    /// Output directory (gen) or trace file (solve).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Keep finished traces already in the output file.
    #[arg(long)]
    resume: bool,
}

impl RunArgs {
    fn flags(&self) -> FileConfig {
        FileConfig {
            domain: self.domain.clone(),
            categories: (!self.categories.is_empty()).then(|| self.categories.clone()),
            solver: self.solver.clone(),
            inductive: self.inductive.clone(),
            transductive: self.transductive.clone(),
            inner_k: self.inner_k,
            outer_t: self.outer_t,
            step_limit: self.step_limit,
            beam: self.beam,
            wall_clock_cap: self.wall_clock_cap,
            timeout: self.timeout,
            seed: self.seed,
            count: self.count,
            train_count: self.train_count,
            jobs: self.jobs,
            tasks: (!self.tasks.is_empty()).then(|| self.tasks.clone()),
            out: self.out.clone(),
        }
    }

    fn resolve(&self) -> Result<RunConfig, Failure> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p).map_err(Failure::Usage)?,
            None => FileConfig::default(),
        };
        RunConfig::resolve(file, self.flags()).map_err(Failure::Usage)
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Trace files; several solvers can be compared side by side.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

#[derive(Args)]
struct StubArgs {
    /// Task files whose ground truth answers subgoal requests.
    #[arg(long, required = true)]
    tasks: Vec<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.cmd {
        Cmd::Gen(args) => cmd_gen(&args),
        Cmd::Solve(args) => cmd_solve(&args),
        Cmd::Report(args) => cmd_report(&args),
        Cmd::StubModel(args) => cmd_stub(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_tasks(paths: &[PathBuf]) -> Result<Vec<TaskRecord>, Failure> {
    let mut tasks = Vec::new();
    for p in paths {
        if !p.is_file() {
            return Err(Failure::Usage(format!("task file {} not found", p.display())));
        }
        let more = benchgen::read_dataset(p).map_err(|e| match e {
            DatasetError::Io(e) => Failure::Runtime(format!("{}: {e}", p.display())),
            DatasetError::Parse(e) => Failure::Runtime(format!("{}: {e}", p.display())),
        })?;
        tasks.extend(more);
    }
    Ok(tasks)
}

fn cmd_gen(args: &RunArgs) -> Result<(), Failure> {
    let cfg = args.resolve()?;
    let domain = cfg.domain.ok_or_else(|| Failure::Usage("gen needs --domain".into()))?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("data"));
    std::fs::create_dir_all(&out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    for &category in &cfg.categories {
        for split in [Split::Train, Split::Test] {
            let count = match split {
                Split::Train => cfg.train_count.unwrap_or(cfg.count),
                Split::Test => cfg.count,
            };
            let tasks = benchgen::generate_split(domain, category, split, count, cfg.seed, &SampleConfig::default())
                .map_err(|e| Failure::Runtime(format!("{domain} {category} {split}: {e}")))?;
            let path = out.join(format!("{domain}_{category}_{split}.jsonl"));
            benchgen::write_dataset(&tasks, &path)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            println!("{domain} {category} {split}: {} tasks -> {}", tasks.len(), path.display());
        }
    }
    Ok(())
}

fn make_models(cfg: &RunConfig) -> tiips_core::Result<Models> {
    let timeout = Duration::from_secs_f64(cfg.timeout);
    let mut sessions: HashMap<String, SharedSession> = HashMap::new();
    // the same command for both roles runs as one process
    let mut session = |cmd: &str| -> tiips_core::Result<SharedSession> {
        if let Some(s) = sessions.get(cmd) {
            return Ok(s.clone());
        }
        let s = Session::spawn(cmd, timeout)?.shared();
        sessions.insert(cmd.to_string(), s.clone());
        Ok(s)
    };
    let inductive: Box<dyn InductiveModel> = match &cfg.inductive {
        Binding::External(cmd) => Box::new(protocol::external_inductive_adapter(session(cmd)?)),
        _ => Box::new(Enumerator::default()),
    };
    let transductive: Box<dyn TransductiveModel> = match &cfg.transductive {
        Binding::External(cmd) => Box::new(protocol::external_transductive_adapter(session(cmd)?)),
        Binding::Heuristic => Box::new(HeuristicModel),
        _ => Box::new(OracleModel::new()),
    };
    Ok((inductive, transductive))
}

fn cmd_solve(args: &RunArgs) -> Result<(), Failure> {
    let cfg = args.resolve()?;
    if cfg.tasks.is_empty() {
        return Err(Failure::Usage("solve needs --tasks".into()));
    }
    let tasks = read_tasks(&cfg.tasks)?;
    if let Some(d) = cfg.domain {
        if let Some(t) = tasks.iter().find(|t| t.domain != d) {
            return Err(Failure::Usage(format!("task {} is not a {d} task", t.id)));
        }
    }
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("traces.jsonl"));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    let solver = SolverConfig { solver: cfg.solver, budget: cfg.budget, run_seed: cfg.seed };
    let total = tasks.len();
    let (mut done, mut solved) = (0usize, 0usize);
    let report = |trace: &engine::SolveTrace| {
        done += 1;
        if trace.outcome == Outcome::Solved && trace.verify() {
            solved += 1;
        }
        if done % 50 == 0 || done == total {
            eprintln!("[{done}/{total}] accuracy {:.4}", solved as f64 / done as f64);
        }
    };
    let traces = engine::run_batch(&tasks, &solver, cfg.jobs, || make_models(&cfg), Some(&out), args.resume, report)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let results = metrics::results_from_traces(&traces);
    println!(
        "{} solved {}/{} ({:.4}) -> {}",
        cfg.solver,
        results.iter().filter(|r| r.solved).count(),
        results.len(),
        metrics::end_to_end_accuracy(&results),
        out.display()
    );
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<(), Failure> {
    let mut results = Vec::new();
    for p in &args.traces {
        if !p.is_file() {
            return Err(Failure::Usage(format!("trace file {} not found", p.display())));
        }
        let traces = engine::read_traces(p).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
        if let Some(i) = traces.iter().position(|t| t.task.is_none()) {
            return Err(Failure::Runtime(format!("{}: trace {} does not carry its task", p.display(), i + 1)));
        }
        results.extend(metrics::results_from_traces(&traces));
    }
    let files = metrics::export_report(&results, &args.out)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", args.out.display())))?;
    for row in metrics::summarize(&results).rows {
        println!(
            "{} {} {}: accuracy {:.4} ({}/{}), guidance calls {:.2} ± {:.2}",
            row.domain,
            row.category,
            row.solver,
            row.accuracy_mean,
            row.solved,
            row.tasks,
            row.guidance_mean,
            row.guidance_std
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_stub(args: &StubArgs) -> Result<(), Failure> {
    let stub = OracleStub::new(read_tasks(&args.tasks)?);
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    protocol::serve(stdin.lock(), stdout.lock(), |req| stub.handle(req))
        .map_err(|e| Failure::Runtime(format!("stub model: {e}")))
}
