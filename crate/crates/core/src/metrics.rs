//! Accuracy, intent match, syntactic overlap, guidance statistics and report export.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::benchgen::{GenCategory, TaskRecord};
use crate::engine::{Outcome, SolveTrace, SolverKind};
use crate::program::Subprogram;
use crate::value::Domain;

/// Per-task scores. `intent_match` and `syntactic_overlap` are only defined
/// for solved tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskResult {
    pub task_id: String,
    pub domain: Domain,
    pub category: GenCategory,
    pub solver: SolverKind,
    pub run_seed: u64,
    pub solved: bool,
    pub intent_match: Option<f64>,
    pub syntactic_overlap: Option<f64>,
    pub transductive_calls: usize,
    pub steps: usize,
    pub gt_steps: usize,
}

/// Outcome Solved alone is not trusted: the program must re-execute correctly.
pub fn task_result(trace: &SolveTrace, task: &TaskRecord) -> TaskResult {
    let solved = trace.outcome == Outcome::Solved && trace.verify();
    TaskResult {
        task_id: task.id.clone(),
        domain: task.domain,
        category: task.category,
        solver: trace.solver,
        run_seed: trace.run_seed,
        solved,
        intent_match: solved.then(|| intent_match(trace, task)),
        syntactic_overlap: solved.then(|| program_overlap(trace, task)),
        transductive_calls: trace.transductive_call_count,
        steps: trace.steps,
        gt_steps: task.gt_steps.len(),
    }
}

/// Results for every trace that carries its task.
pub fn results_from_traces(traces: &[SolveTrace]) -> Vec<TaskResult> {
    traces
        .iter()
        .filter_map(|t| t.task.as_ref().map(|task| task_result(t, task)))
        .collect()
}

pub fn end_to_end_accuracy(results: &[TaskResult]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    results.iter().filter(|r| r.solved).count() as f64 / results.len() as f64
}

fn ratio(hits: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    (hits as f64 / total as f64).clamp(0.0, 1.0)
}

/// Fraction of ground-truth steps whose outputs the aligned program step reproduces.
pub fn intent_match(trace: &SolveTrace, task: &TaskRecord) -> f64 {
    let Some(program) = trace.program() else { return 0.0 };
    let Ok(outputs) = program.step_outputs(&task.spec) else { return 0.0 };
    let hits = outputs
        .iter()
        .zip(&task.gt_steps)
        .filter(|(o, gt)| **o == gt.outputs)
        .count();
    ratio(hits, task.gt_steps.len())
}

fn canonical(s: &Subprogram) -> String {
    s.to_string().split_whitespace().collect()
}

/// Fraction of ground-truth subprograms matched textually at the same position.
pub fn syntactic_overlap(program: &[Subprogram], gt_program: &[Subprogram]) -> f64 {
    let hits = program
        .iter()
        .zip(gt_program)
        .filter(|(a, b)| a.domain() == b.domain() && canonical(a) == canonical(b))
        .count();
    ratio(hits, gt_program.len())
}

fn program_overlap(trace: &SolveTrace, task: &TaskRecord) -> f64 {
    let gt: Vec<Subprogram> = task.gt_steps.iter().map(|s| s.subprogram.clone()).collect();
    match trace.program() {
        Some(p) => syntactic_overlap(&p.steps(), &gt),
        None => 0.0,
    }
}

/// Population mean and standard deviation; `(0, 0)` for no samples.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

type GroupKey = (Domain, GenCategory, SolverKind);

fn group(results: &[TaskResult]) -> BTreeMap<GroupKey, Vec<&TaskResult>> {
    let mut out: BTreeMap<GroupKey, Vec<&TaskResult>> = BTreeMap::new();
    for r in results {
        out.entry((r.domain, r.category, r.solver)).or_default().push(r);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceStat {
    pub domain: Domain,
    pub category: GenCategory,
    pub solver: SolverKind,
    pub tasks: usize,
    pub calls_mean: f64,
    pub calls_std: f64,
    /// Ground-truth decomposition length, the difficulty proxy.
    pub gt_steps_mean: f64,
    pub gt_steps_std: f64,
}

pub fn guidance_stats(results: &[TaskResult]) -> Vec<GuidanceStat> {
    group(results)
        .into_iter()
        .map(|((domain, category, solver), rs)| {
            let calls: Vec<f64> = rs.iter().map(|r| r.transductive_calls as f64).collect();
            let gt: Vec<f64> = rs.iter().map(|r| r.gt_steps as f64).collect();
            let (calls_mean, calls_std) = mean_std(&calls);
            let (gt_steps_mean, gt_steps_std) = mean_std(&gt);
            GuidanceStat {
                domain,
                category,
                solver,
                tasks: rs.len(),
                calls_mean,
                calls_std,
                gt_steps_mean,
                gt_steps_std,
            }
        })
        .collect()
}

/// Mean transductive calls of `a` and `b` over the tasks both solved, and the
/// number of such tasks. Tasks are matched by id and run seed.
pub fn co_solved_guidance(a: &[TaskResult], b: &[TaskResult]) -> (f64, f64, usize) {
    let solved_b: HashMap<(&str, u64), &TaskResult> = b
        .iter()
        .filter(|r| r.solved)
        .map(|r| ((r.task_id.as_str(), r.run_seed), r))
        .collect();
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for r in a.iter().filter(|r| r.solved) {
        if let Some(o) = solved_b.get(&(r.task_id.as_str(), r.run_seed)) {
            xa.push(r.transductive_calls as f64);
            xb.push(o.transductive_calls as f64);
        }
    }
    (mean_std(&xa).0, mean_std(&xb).0, xa.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub domain: Domain,
    pub category: GenCategory,
    pub solver: SolverKind,
    pub tasks: usize,
    pub solved: usize,
    pub seeds: usize,
    /// Over run seeds.
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    /// Over tasks.
    pub guidance_mean: f64,
    pub guidance_std: f64,
    pub intent_match_mean: f64,
    pub syntactic_overlap_mean: f64,
    pub gt_steps_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryReport {
    pub rows: Vec<SummaryRow>,
}

pub fn summarize(results: &[TaskResult]) -> SummaryReport {
    let rows = group(results)
        .into_iter()
        .map(|((domain, category, solver), rs)| {
            let mut by_seed: BTreeMap<u64, Vec<bool>> = BTreeMap::new();
            for r in &rs {
                by_seed.entry(r.run_seed).or_default().push(r.solved);
            }
            let per_seed: Vec<f64> = by_seed
                .values()
                .map(|v| v.iter().filter(|s| **s).count() as f64 / v.len() as f64)
                .collect();
            let (accuracy_mean, accuracy_std) = mean_std(&per_seed);
            let calls: Vec<f64> = rs.iter().map(|r| r.transductive_calls as f64).collect();
            let (guidance_mean, guidance_std) = mean_std(&calls);
            let intent: Vec<f64> = rs.iter().filter_map(|r| r.intent_match).collect();
            let overlap: Vec<f64> = rs.iter().filter_map(|r| r.syntactic_overlap).collect();
            let gt: Vec<f64> = rs.iter().map(|r| r.gt_steps as f64).collect();
            SummaryRow {
                domain,
                category,
                solver,
                tasks: rs.len(),
                solved: rs.iter().filter(|r| r.solved).count(),
                seeds: by_seed.len(),
                accuracy_mean,
                accuracy_std,
                guidance_mean,
                guidance_std,
                intent_match_mean: mean_std(&intent).0,
                syntactic_overlap_mean: mean_std(&overlap).0,
                gt_steps_mean: mean_std(&gt).0,
            }
        })
        .collect();
    SummaryReport { rows }
}

pub const SUMMARY_HEADER: &str = "domain,category,solver,tasks,solved,seeds,accuracy_mean,accuracy_std,\
guidance_mean,guidance_std,intent_match_mean,syntactic_overlap_mean,gt_steps_mean";
pub const SCATTER_HEADER: &str = "task_id,solver,domain,category,x,y";
pub const HISTOGRAM_HEADER: &str = "domain,category,solver,transductive_calls,tasks";

pub fn table_header() -> String {
    let mut h = String::from("domain,solver");
    for c in GenCategory::ALL {
        h.push(',');
        h.push_str(c.as_str());
    }
    h
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

/// Task ids are generated, but quote anything that could break a CSV field.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(report: &SummaryReport) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.domain,
            r.category,
            r.solver,
            r.tasks,
            r.solved,
            r.seeds,
            f4(r.accuracy_mean),
            f4(r.accuracy_std),
            f4(r.guidance_mean),
            f4(r.guidance_std),
            f4(r.intent_match_mean),
            f4(r.syntactic_overlap_mean),
            f4(r.gt_steps_mean),
        );
    }
    out
}

/// Accuracy as `mean ± std` per category; blank where no tasks were run.
pub fn table_csv(report: &SummaryReport) -> String {
    let mut out = table_header();
    out.push('\n');
    let keys: BTreeSet<(Domain, SolverKind)> = report.rows.iter().map(|r| (r.domain, r.solver)).collect();
    for (domain, solver) in keys {
        let _ = write!(out, "{domain},{solver}");
        for c in GenCategory::ALL {
            out.push(',');
            if let Some(r) = report
                .rows
                .iter()
                .find(|r| r.domain == domain && r.solver == solver && r.category == c)
            {
                let _ = write!(out, "{:.2} ± {:.2}", 100.0 * r.accuracy_mean, 100.0 * r.accuracy_std);
            }
        }
        out.push('\n');
    }
    out
}

/// One row per solved task.
pub fn scatter_csv(results: &[TaskResult]) -> String {
    let mut out = format!("{SCATTER_HEADER}\n");
    for r in results.iter().filter(|r| r.solved) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            field(&r.task_id),
            r.solver,
            r.domain,
            r.category,
            f4(r.intent_match.unwrap_or(0.0)),
            f4(r.syntactic_overlap.unwrap_or(0.0)),
        );
    }
    out
}

pub fn histogram_csv(results: &[TaskResult]) -> String {
    let mut counts: BTreeMap<(Domain, GenCategory, SolverKind, usize), usize> = BTreeMap::new();
    for r in results {
        *counts.entry((r.domain, r.category, r.solver, r.transductive_calls)).or_default() += 1;
    }
    let mut out = format!("{HISTOGRAM_HEADER}\n");
    for ((d, c, s, calls), n) in counts {
        let _ = writeln!(out, "{d},{c},{s},{calls},{n}");
    }
    out
}

/// Write `summary.csv`, `table.csv`, `scatter.csv` and `histogram.csv` into `dir`.
pub fn export_report(results: &[TaskResult], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let report = summarize(results);
    let files = [
        ("summary.csv", summary_csv(&report)),
        ("table.csv", table_csv(&report)),
        ("scatter.csv", scatter_csv(results)),
        ("histogram.csv", histogram_csv(results)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
