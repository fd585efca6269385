//! Solver loops (TIIPS, ExeDec, Baseline), their traces and the batch runner.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Seek, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::benchgen::TaskRecord;
use crate::error::{ErrorKind, ParseError, Result, SynthError};
use crate::inductive::{Candidate, InductiveModel};
use crate::program::{self, Program, Subprogram};
use crate::transductive::{build_subtask, TransductiveModel};
use crate::value::{IoSpec, Value};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    /// Inner (inductive) iterations per outer iteration.
    pub k: usize,
    /// Outer iterations, i.e. transductive calls for TIIPS.
    pub t: usize,
    /// Subprograms in any one attempted program.
    pub step_limit: usize,
    pub beam: usize,
    /// Seconds; `None` leaves runs bounded by the counts above only.
    #[serde(default)]
    pub wall_clock_cap: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { k: 10, t: 10, step_limit: 10, beam: 10, wall_clock_cap: None }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.t == 0 || self.step_limit == 0 || self.beam == 0 {
            return Err(SynthError::TypeError("K, T, step limit and beam must all be at least 1".into()));
        }
        if self.wall_clock_cap.is_some_and(|c| !(c > 0.0)) {
            return Err(SynthError::TypeError("wall-clock cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Tiips,
    Exedec,
    Baseline,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Tiips => "tiips",
            SolverKind::Exedec => "exedec",
            SolverKind::Baseline => "baseline",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "tiips" => Ok(SolverKind::Tiips),
            "exedec" => Ok(SolverKind::Exedec),
            "baseline" => Ok(SolverKind::Baseline),
            _ => Err(format!("unknown solver `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Solved,
    Unsolved,
    Error,
}

/// One inductive attempt or one transductive call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttemptRecord {
    pub outer: usize,
    pub inner: usize,
    pub guidance_used: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_subgoal: Option<Vec<Value>>,
    /// Chosen subprogram; absent when no candidate could be applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subprogram: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub executed: Option<Vec<Value>>,
    /// State after the update (unchanged when no subprogram was applied).
    pub state: IoSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveTrace {
    pub solver: SolverKind,
    pub spec: IoSpec,
    pub attempts: Vec<AttemptRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_program: Option<String>,
    pub outcome: Outcome,
    pub transductive_call_count: usize,
    /// Subprograms in the final (or last) attempted program.
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub run_seed: u64,
    /// The solved task, when run through a batch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskRecord>,
}

impl SolveTrace {
    fn new(solver: SolverKind, spec: &IoSpec) -> Self {
        SolveTrace {
            solver,
            spec: spec.clone(),
            attempts: Vec::new(),
            final_program: None,
            outcome: Outcome::Unsolved,
            transductive_call_count: 0,
            steps: 0,
            error: None,
            run_seed: 0,
            task: None,
        }
    }

    pub fn task_id(&self) -> Option<&str> {
        self.task.as_ref().map(|t| t.id.as_str())
    }

    pub fn guidance_records(&self) -> usize {
        self.attempts.iter().filter(|a| a.guidance_used).count()
    }

    pub fn program(&self) -> Option<Program> {
        self.final_program
            .as_deref()
            .and_then(|p| Program::parse(self.spec.domain, p).ok())
    }

    /// Re-execute the final program on the original examples.
    pub fn verify(&self) -> bool {
        self.program().is_some_and(|p| p.verify(&self.spec))
    }

    fn solved(&mut self, steps: &[Subprogram]) -> Result<()> {
        let p = program::combine(steps, &self.spec)?;
        self.steps = p.len();
        self.final_program = Some(p.to_string());
        self.outcome = Outcome::Solved;
        Ok(())
    }

    fn fail(&mut self, outcome: Outcome, err: Option<&SynthError>) {
        self.outcome = outcome;
        self.error = err.map(|e| e.to_string());
    }
}

/// How a model failure ends a solve: budget problems leave the task unsolved,
/// everything else is an error.
fn outcome_of(e: &SynthError) -> Outcome {
    match e.kind() {
        ErrorKind::BudgetExhausted => Outcome::Unsolved,
        _ => Outcome::Error,
    }
}

struct Clock {
    start: Instant,
    cap: Option<Duration>,
}

impl Clock {
    fn new(b: &Budget) -> Self {
        Clock { start: Instant::now(), cap: b.wall_clock_cap.map(Duration::from_secs_f64) }
    }

    fn check(&self) -> Result<()> {
        match self.cap {
            Some(cap) if self.start.elapsed() > cap => {
                Err(SynthError::BudgetExhausted("wall-clock cap reached".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Execute and apply a candidate. `None` if it fails on some example or the
/// update rejects it.
fn apply(c: &Candidate, state: &IoSpec) -> Option<(Vec<Value>, IoSpec)> {
    let executed = c.subprogram.execute(state).ok()?;
    let next = program::update(state, &executed).ok()?;
    Some((executed, next))
}

enum Inner {
    Solved(Vec<Subprogram>),
    /// No candidate applied although the beam was non-empty.
    Stuck,
    Exhausted,
}

/// Greedy inductive steps from `state`, extending the already fixed `prefix`.
#[allow(clippy::too_many_arguments)]
fn inner_loop(
    inductive: &mut dyn InductiveModel,
    state: &IoSpec,
    prefix: &[Subprogram],
    outer: usize,
    budget: &Budget,
    clock: &Clock,
    trace: &mut SolveTrace,
) -> Result<Inner> {
    let mut state = state.clone();
    let mut steps = prefix.to_vec();
    for k in 1..=budget.k {
        if steps.len() >= budget.step_limit {
            break;
        }
        clock.check()?;
        let cands = inductive.propose(&state, budget.beam)?;
        let Some((c, executed, next)) = cands
            .iter()
            .find_map(|c| apply(c, &state).map(|(e, n)| (c, e, n)))
        else {
            return Ok(if cands.is_empty() { Inner::Exhausted } else { Inner::Stuck });
        };
        trace.attempts.push(AttemptRecord {
            outer,
            inner: k,
            guidance_used: false,
            predicted_subgoal: None,
            subprogram: Some(c.subprogram.to_string()),
            executed: Some(executed.clone()),
            state: next.clone(),
        });
        steps.push(c.subprogram.clone());
        trace.steps = steps.len();
        let solved = program::is_solved(&next, Some(&executed));
        state = next;
        if solved {
            return Ok(Inner::Solved(steps));
        }
    }
    Ok(Inner::Exhausted)
}

enum Guided {
    Step(Subprogram, IoSpec, Vec<Value>),
    NoPrediction,
    /// Candidates existed for the subtask but none applied to the state.
    Stuck,
    Empty,
}

/// One transductive call followed by inductive synthesis of the subtask.
#[allow(clippy::too_many_arguments)]
fn guided_step(
    inductive: &mut dyn InductiveModel,
    transductive: &mut dyn TransductiveModel,
    state: &IoSpec,
    rank: usize,
    outer: usize,
    budget: &Budget,
    trace: &mut SolveTrace,
) -> Result<Guided> {
    trace.transductive_call_count += 1;
    let record = |trace: &mut SolveTrace, pred: Option<Vec<Value>>| {
        trace.attempts.push(AttemptRecord {
            outer,
            inner: 0,
            guidance_used: true,
            predicted_subgoal: pred,
            subprogram: None,
            executed: None,
            state: state.clone(),
        });
    };
    let preds = match transductive.predict_subgoals(state, budget.beam) {
        Ok(p) => p,
        Err(e) => {
            record(trace, None);
            return Err(e);
        }
    };
    let Some(pred) = preds.get(rank.min(preds.len().saturating_sub(1))) else {
        record(trace, None);
        return Ok(Guided::NoPrediction);
    };
    let subtask = match build_subtask(state, pred) {
        Ok(s) => s,
        Err(e) => {
            record(trace, Some(pred.outputs.clone()));
            return Err(e);
        }
    };
    let cands = match inductive.propose(&subtask, budget.beam) {
        Ok(c) => c,
        Err(e) => {
            record(trace, Some(pred.outputs.clone()));
            return Err(e);
        }
    };
    // prefer a candidate that reproduces the subgoal exactly
    let applied: Vec<(&Candidate, Vec<Value>, IoSpec)> = cands
        .iter()
        .filter_map(|c| apply(c, state).map(|(e, n)| (c, e, n)))
        .collect();
    let chosen = applied
        .iter()
        .position(|(_, e, _)| *e == pred.outputs)
        .or(if applied.is_empty() { None } else { Some(0) });
    let Some(i) = chosen else {
        record(trace, Some(pred.outputs.clone()));
        return Ok(if cands.is_empty() { Guided::Empty } else { Guided::Stuck });
    };
    let (c, executed, next) = &applied[i];
    trace.attempts.push(AttemptRecord {
        outer,
        inner: 0,
        guidance_used: true,
        predicted_subgoal: Some(pred.outputs.clone()),
        subprogram: Some(c.subprogram.to_string()),
        executed: Some(executed.clone()),
        state: next.clone(),
    });
    Ok(Guided::Step(c.subprogram.clone(), next.clone(), executed.clone()))
}

/// Inner inductive loop with sparse transductive re-seeding after K failures.
pub fn solve_tiips(
    spec: &IoSpec,
    inductive: &mut dyn InductiveModel,
    transductive: &mut dyn TransductiveModel,
    budget: &Budget,
) -> SolveTrace {
    let mut trace = SolveTrace::new(SolverKind::Tiips, spec);
    if let Err(e) = run_tiips(spec, inductive, transductive, budget, &mut trace) {
        let outcome = outcome_of(&e);
        trace.fail(outcome, Some(&e));
    }
    trace
}

fn run_tiips(
    spec: &IoSpec,
    inductive: &mut dyn InductiveModel,
    transductive: &mut dyn TransductiveModel,
    budget: &Budget,
    trace: &mut SolveTrace,
) -> Result<()> {
    budget.validate()?;
    let clock = Clock::new(budget);
    let mut outer_state = spec.clone();
    let mut guided: Vec<Subprogram> = Vec::new();
    for t in 1..=budget.t {
        if let Inner::Solved(steps) = inner_loop(inductive, &outer_state, &guided, t, budget, &clock, trace)? {
            return trace.solved(&steps);
        }
        if guided.len() >= budget.step_limit {
            break;
        }
        clock.check()?;
        let rank = t.min(budget.beam) - 1;
        match guided_step(inductive, transductive, &outer_state, rank, t, budget, trace)? {
            Guided::Step(sub, next, executed) => {
                guided.push(sub);
                trace.steps = guided.len();
                let solved = program::is_solved(&next, Some(&executed));
                outer_state = next;
                if solved {
                    return trace.solved(&guided);
                }
            }
            Guided::Stuck => {
                trace.fail(Outcome::Error, None);
                return Ok(());
            }
            Guided::NoPrediction | Guided::Empty => break,
        }
    }
    trace.fail(Outcome::Unsolved, None);
    Ok(())
}

/// Guidance before every step.
pub fn solve_exedec(
    spec: &IoSpec,
    inductive: &mut dyn InductiveModel,
    transductive: &mut dyn TransductiveModel,
    budget: &Budget,
) -> SolveTrace {
    let mut trace = SolveTrace::new(SolverKind::Exedec, spec);
    if let Err(e) = run_exedec(spec, inductive, transductive, budget, &mut trace) {
        let outcome = outcome_of(&e);
        trace.fail(outcome, Some(&e));
    }
    trace
}

fn run_exedec(
    spec: &IoSpec,
    inductive: &mut dyn InductiveModel,
    transductive: &mut dyn TransductiveModel,
    budget: &Budget,
    trace: &mut SolveTrace,
) -> Result<()> {
    budget.validate()?;
    let clock = Clock::new(budget);
    let mut state = spec.clone();
    let mut steps: Vec<Subprogram> = Vec::new();
    for s in 1..=budget.step_limit {
        clock.check()?;
        match guided_step(inductive, transductive, &state, 0, s, budget, trace)? {
            Guided::Step(sub, next, executed) => {
                steps.push(sub);
                trace.steps = steps.len();
                let solved = program::is_solved(&next, Some(&executed));
                state = next;
                if solved {
                    return trace.solved(&steps);
                }
            }
            Guided::Stuck => {
                trace.fail(Outcome::Error, None);
                return Ok(());
            }
            Guided::NoPrediction | Guided::Empty => break,
        }
    }
    trace.fail(Outcome::Unsolved, None);
    Ok(())
}

/// The inner loop alone; never consults a transductive model.
pub fn solve_baseline(spec: &IoSpec, inductive: &mut dyn InductiveModel, budget: &Budget) -> SolveTrace {
    let mut trace = SolveTrace::new(SolverKind::Baseline, spec);
    let result = budget.validate().and_then(|_| {
        let clock = Clock::new(budget);
        inner_loop(inductive, spec, &[], 1, budget, &clock, &mut trace)
    });
    match result {
        Ok(Inner::Solved(steps)) => {
            if let Err(e) = trace.solved(&steps) {
                trace.fail(Outcome::Error, Some(&e));
            }
        }
        Ok(Inner::Stuck) => trace.fail(Outcome::Error, None),
        Ok(Inner::Exhausted) => trace.fail(Outcome::Unsolved, None),
        Err(e) => {
            let outcome = outcome_of(&e);
            trace.fail(outcome, Some(&e));
        }
    }
    trace
}

pub use crate::program::combine;

/// Run one solver on one spec.
pub fn solve(
    solver: SolverKind,
    spec: &IoSpec,
    inductive: &mut dyn InductiveModel,
    transductive: &mut dyn TransductiveModel,
    budget: &Budget,
) -> SolveTrace {
    match solver {
        SolverKind::Tiips => solve_tiips(spec, inductive, transductive, budget),
        SolverKind::Exedec => solve_exedec(spec, inductive, transductive, budget),
        SolverKind::Baseline => solve_baseline(spec, inductive, budget),
    }
}

// ---------------------------------------------------------------------------
// Batches

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub solver: SolverKind,
    pub budget: Budget,
    pub run_seed: u64,
}

pub type Models = (Box<dyn InductiveModel>, Box<dyn TransductiveModel>);

/// Solve one task with fresh-task hooks, isolating panics.
pub fn solve_task(task: &TaskRecord, cfg: &SolverConfig, models: &mut Models) -> SolveTrace {
    let (ind, trans) = models;
    ind.begin_task(task);
    trans.begin_task(task);
    let run = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        solve(cfg.solver, &task.spec, ind.as_mut(), trans.as_mut(), &cfg.budget)
    }));
    let mut trace = run.unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "solver panicked".into());
        let mut t = SolveTrace::new(cfg.solver, &task.spec);
        t.fail(Outcome::Error, Some(&SynthError::exec(msg)));
        t
    });
    trace.run_seed = cfg.run_seed;
    trace.task = Some(task.clone());
    trace
}

/// Parse one trace line; errors carry the 1-based line number.
pub fn parse_trace_line(line: &str, lineno: usize) -> std::result::Result<SolveTrace, ParseError> {
    serde_json::from_str(line)
        .map_err(|e| ParseError::new(lineno, &["trace record"], format!("line {lineno}: {e}")))
}

pub fn read_traces(path: &Path) -> std::result::Result<Vec<SolveTrace>, crate::benchgen::DatasetError> {
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_trace_line(&line, i + 1)?);
    }
    Ok(out)
}

/// Leading traces in `path` that match `tasks` in order; the file is cut
/// back to the end of the last such line so that appends continue cleanly.
fn resume_prefix(path: &Path, tasks: &[TaskRecord], cfg: &SolverConfig) -> std::io::Result<Vec<SolveTrace>> {
    let Ok(file) = std::fs::File::open(path) else { return Ok(Vec::new()) };
    let mut reader = std::io::BufReader::new(file);
    let mut done = Vec::new();
    let mut good_len = 0u64;
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader.read_line(&mut line)?;
        if n == 0 || !line.ends_with('\n') {
            break;
        }
        let Ok(trace) = serde_json::from_str::<SolveTrace>(&line) else { break };
        let expected = tasks.get(done.len()).map(|t| t.id.as_str());
        if trace.task_id() != expected || trace.solver != cfg.solver || trace.run_seed != cfg.run_seed {
            break;
        }
        good_len += n as u64;
        done.push(trace);
    }
    let f = std::fs::OpenOptions::new().write(true).open(path)?;
    f.set_len(good_len)?;
    Ok(done)
}

/// Solve every task with `jobs` workers, each owning models from `make_models`.
///
/// Traces are written to `sink` in task order as they complete. With `resume`,
/// finished tasks found at the head of `sink` are kept and not recomputed.
pub fn run_batch<F>(
    tasks: &[TaskRecord],
    cfg: &SolverConfig,
    jobs: usize,
    make_models: F,
    sink: Option<&Path>,
    resume: bool,
    mut on_trace: impl FnMut(&SolveTrace),
) -> Result<Vec<SolveTrace>>
where
    F: Fn() -> Result<Models> + Sync,
{
    cfg.budget.validate()?;
    let io = |e: std::io::Error| SynthError::ProtocolError(format!("trace file: {e}"));
    let mut results: Vec<SolveTrace> = match (sink, resume) {
        (Some(path), true) => resume_prefix(path, tasks, cfg).map_err(io)?,
        _ => Vec::new(),
    };
    for t in &results {
        on_trace(t);
    }
    let mut writer = match sink {
        Some(path) => {
            let mut f = std::fs::OpenOptions::new()
                .create(true)
                .write(true)
                .truncate(!resume)
                .open(path)
                .map_err(io)?;
            f.seek(std::io::SeekFrom::End(0)).map_err(io)?;
            Some(std::io::BufWriter::new(f))
        }
        None => None,
    };
    let start = results.len();
    let pending = &tasks[start..];
    let next = AtomicUsize::new(0);
    let jobs = jobs.max(1).min(pending.len().max(1));
    let (tx, rx) = mpsc::channel::<(usize, Result<SolveTrace>)>();
    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..jobs {
            let tx = tx.clone();
            let next = &next;
            let make_models = &make_models;
            scope.spawn(move || {
                let mut models = match make_models() {
                    Ok(m) => m,
                    Err(e) => {
                        let _ = tx.send((usize::MAX, Err(e)));
                        return;
                    }
                };
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= pending.len() {
                        break;
                    }
                    let trace = solve_task(&pending[i], cfg, &mut models);
                    if tx.send((i, Ok(trace))).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        let mut buffer: BTreeMap<usize, SolveTrace> = BTreeMap::new();
        let mut written = 0usize;
        let mut failure = None;
        for (i, r) in rx {
            match r {
                Ok(trace) => {
                    buffer.insert(i, trace);
                }
                Err(e) => {
                    // stop handing out work; workers finish their current task
                    next.store(usize::MAX / 2, Ordering::SeqCst);
                    failure.get_or_insert(e);
                    continue;
                }
            }
            while let Some(trace) = buffer.remove(&written) {
                if let Some(w) = writer.as_mut() {
                    serde_json::to_writer(&mut *w, &trace).map_err(|e| io(e.into()))?;
                    w.write_all(b"\n").map_err(io)?;
                    w.flush().map_err(io)?;
                }
                on_trace(&trace);
                results.push(trace);
                written += 1;
            }
        }
        match failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    })?;
    Ok(results)
}
