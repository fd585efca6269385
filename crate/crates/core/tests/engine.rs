use std::cell::Cell;
use std::rc::Rc;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use tiips_core::benchgen::{generate_split, read_dataset, GenCategory, SampleConfig, Split, TaskRecord};
use tiips_core::engine::{
    read_traces, run_batch, solve, solve_baseline, solve_exedec, solve_tiips, Budget, Models, Outcome,
    SolverConfig, SolverKind,
};
use tiips_core::inductive::{Candidate, Enumerator, InductiveModel};
use tiips_core::program::Subprogram;
use tiips_core::transductive::{OracleModel, SubgoalPrediction, TransductiveModel};
use tiips_core::{Domain, IoSpec, Result, SynthError};

fn tasks(domain: Domain, cat: GenCategory, n: usize, seed: u64) -> Vec<TaskRecord> {
    generate_split(domain, cat, Split::Test, n, seed, &SampleConfig::default()).unwrap()
}

fn propose_only(text: &str, spec: &IoSpec) -> Result<Vec<Candidate>> {
    Ok(vec![Candidate { subprogram: Subprogram::parse(text, spec)?, score: 0.0 }])
}

/// Proposes a string step that fails on every generated input.
struct Failing {
    calls: Rc<Cell<usize>>,
}

impl InductiveModel for Failing {
    fn propose(&mut self, spec: &IoSpec, _beam: usize) -> Result<Vec<Candidate>> {
        self.calls.set(self.calls.get() + 1);
        propose_only("GetToken(NUMBER, 5)", spec)
    }
}

/// Applies but never completes a list task.
struct Stalling;

impl InductiveModel for Stalling {
    fn propose(&mut self, spec: &IoSpec, _beam: usize) -> Result<Vec<Candidate>> {
        propose_only("Reverse x0", spec)
    }
}

struct Counting<T> {
    inner: T,
    calls: Rc<Cell<usize>>,
}

impl<T: TransductiveModel> TransductiveModel for Counting<T> {
    fn predict_subgoals(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<SubgoalPrediction>> {
        self.calls.set(self.calls.get() + 1);
        self.inner.predict_subgoals(spec, beam)
    }
}

#[test]
fn k_inner_failures_then_one_guidance_call() {
    let set = tasks(Domain::List, GenCategory::LengthGeneralization, 10, 5);
    let task = set.iter().find(|t| t.spec.examples[0].inputs.len() == 1).unwrap();
    let calls = Rc::new(Cell::new(0));
    let mut trans = Counting { inner: OracleModel::for_task(task.clone()), calls: calls.clone() };
    let budget = Budget { k: 3, t: 1, ..Budget::default() };
    let trace = solve_tiips(&task.spec, &mut Stalling, &mut trans, &budget);
    assert_eq!(calls.get(), 1);
    assert_eq!(trace.transductive_call_count, 1);
    let inner: Vec<_> = trace.attempts.iter().filter(|a| !a.guidance_used).collect();
    assert_eq!(inner.len(), 3);
    assert!(trace.attempts.last().unwrap().guidance_used);
    assert_eq!(trace.outcome, Outcome::Unsolved);
}

#[test]
fn every_candidate_failing_is_an_error() {
    let task = &tasks(Domain::String, GenCategory::TrainDistribution, 1, 2)[0];
    let calls = Rc::new(Cell::new(0));
    let trace = solve_baseline(&task.spec, &mut Failing { calls: calls.clone() }, &Budget::default());
    assert_eq!(trace.outcome, Outcome::Error);
    assert_eq!(calls.get(), 1);
}

#[test]
fn model_errors_classified() {
    struct Broken(SynthError);
    impl TransductiveModel for Broken {
        fn predict_subgoals(&mut self, _: &IoSpec, _: usize) -> Result<Vec<SubgoalPrediction>> {
            Err(self.0.clone())
        }
    }
    let task = &tasks(Domain::List, GenCategory::TrainDistribution, 1, 4)[0];
    let budget = Budget::default();
    let t = solve_exedec(&task.spec, &mut Enumerator::default(), &mut Broken(SynthError::ProtocolError("x".into())), &budget);
    assert_eq!(t.outcome, Outcome::Error);
    assert_eq!(t.transductive_call_count, t.guidance_records());
    let t = solve_exedec(&task.spec, &mut Enumerator::default(), &mut Broken(SynthError::BudgetExhausted("x".into())), &budget);
    assert_eq!(t.outcome, Outcome::Unsolved);
    assert!(t.error.is_some());
}

#[test]
fn invalid_budget_rejected() {
    let task = &tasks(Domain::List, GenCategory::TrainDistribution, 1, 4)[0];
    let t = solve_baseline(&task.spec, &mut Enumerator::default(), &Budget { k: 0, ..Budget::default() });
    assert_eq!(t.outcome, Outcome::Error);
}

#[test]
fn structural_invariants_on_generated_tasks() {
    let budget = Budget::default();
    let mut all = tasks(Domain::List, GenCategory::ComposeNewOperation, 40, 11);
    all.extend(tasks(Domain::String, GenCategory::TrainDistribution, 12, 11));
    for task in &all {
        let mut traces = Vec::new();
        for solver in [SolverKind::Tiips, SolverKind::Exedec, SolverKind::Baseline] {
            let mut oracle = OracleModel::for_task(task.clone());
            let t = solve(solver, &task.spec, &mut Enumerator::default(), &mut oracle, &budget);
            assert_eq!(t.transductive_call_count, t.guidance_records(), "{}", task.id);
            if t.outcome == Outcome::Solved {
                assert!(t.verify(), "{} {solver}", task.id);
            }
            let inner = t.attempts.iter().filter(|a| !a.guidance_used).count();
            assert!(inner <= budget.k * budget.t);
            assert!(t.steps <= budget.step_limit);
            traces.push(t);
        }
        let (tiips, exedec, baseline) = (&traces[0], &traces[1], &traces[2]);
        assert_eq!(baseline.transductive_call_count, 0);
        assert!(tiips.transductive_call_count <= exedec.transductive_call_count.max(1));
        if exedec.outcome == Outcome::Solved {
            assert_eq!(exedec.transductive_call_count, exedec.steps);
        }
        if task.gt_steps.len() <= 2 && task.domain == Domain::List {
            assert_eq!(tiips.outcome, Outcome::Solved, "{}", task.id);
            assert!(tiips.transductive_call_count <= 2);
        }
    }
}

fn builtin() -> Result<Models> {
    Ok((Box::new(Enumerator::default()), Box::new(OracleModel::new())))
}

#[test]
fn batch_order_determinism_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let set = tasks(Domain::List, GenCategory::SwitchConceptOrder, 30, 3);
    let cfg = SolverConfig { solver: SolverKind::Tiips, budget: Budget::default(), run_seed: 9 };
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let one = run_batch(&set, &cfg, 1, builtin, Some(&a), false, |_| {}).unwrap();
    let four = run_batch(&set, &cfg, 4, builtin, Some(&b), false, |_| {}).unwrap();
    assert_eq!(one, four);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let ids: Vec<_> = one.iter().map(|t| t.task_id().unwrap().to_string()).collect();
    let want: Vec<_> = set.iter().map(|t| t.id.clone()).collect();
    assert_eq!(ids, want);

    // cut the file mid-record and resume: finished tasks are not recomputed
    let full = std::fs::read(&a).unwrap();
    let lines: Vec<usize> = full.iter().enumerate().filter(|(_, b)| **b == b'\n').map(|(i, _)| i).collect();
    std::fs::write(&a, &full[..lines[11] + 20]).unwrap();
    struct Tally(Arc<AtomicUsize>, Enumerator);
    impl InductiveModel for Tally {
        fn begin_task(&mut self, _task: &TaskRecord) {
            self.0.fetch_add(1, Ordering::SeqCst);
        }
        fn propose(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<Candidate>> {
            self.1.propose(spec, beam)
        }
    }
    let begun = Arc::new(AtomicUsize::new(0));
    let counting = || -> Result<Models> {
        Ok((Box::new(Tally(begun.clone(), Enumerator::default())), Box::new(OracleModel::new())))
    };
    let mut seen = 0;
    let resumed = run_batch(&set, &cfg, 1, counting, Some(&a), true, |_| seen += 1).unwrap();
    assert_eq!(seen, 30);
    assert_eq!(begun.load(Ordering::SeqCst), 30 - 12);
    assert_eq!(resumed, one);
    assert_eq!(std::fs::read(&a).unwrap(), full);
    assert_eq!(read_traces(&a).unwrap(), one);
}

#[test]
fn batch_isolates_panics() {
    struct Bomb;
    impl InductiveModel for Bomb {
        fn propose(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<Candidate>> {
            if spec.examples[0].inputs.len() == 1 {
                panic!("boom");
            }
            Enumerator::default().propose(spec, beam)
        }
    }
    let set = tasks(Domain::List, GenCategory::TrainDistribution, 20, 8);
    let cfg = SolverConfig { solver: SolverKind::Baseline, budget: Budget::default(), run_seed: 0 };
    let prev = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let traces = run_batch(&set, &cfg, 2, || Ok((Box::new(Bomb) as Box<dyn InductiveModel>, Box::new(OracleModel::new()) as Box<dyn TransductiveModel>)), None, false, |_| {}).unwrap();
    std::panic::set_hook(prev);
    assert_eq!(traces.len(), 20);
    let bombed = traces.iter().filter(|t| t.error.as_deref() == Some("execution failure: boom")).count();
    let single = set.iter().filter(|t| t.spec.examples[0].inputs.len() == 1).count();
    assert!(single > 0);
    assert_eq!(bombed, single);
}

#[test]
fn model_factory_failure_aborts_batch() {
    let set = tasks(Domain::List, GenCategory::TrainDistribution, 3, 8);
    let cfg = SolverConfig { solver: SolverKind::Tiips, budget: Budget::default(), run_seed: 0 };
    let err = run_batch(&set, &cfg, 1, || Err(SynthError::ProtocolError("cannot start".into())), None, false, |_| {})
        .unwrap_err();
    assert_eq!(err.kind(), tiips_core::ErrorKind::ProtocolError);
}

#[test]
fn traces_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let set = tasks(Domain::String, GenCategory::SwitchConceptOrder, 3, 1);
    let path = dir.path().join("tasks.jsonl");
    tiips_core::benchgen::write_dataset(&set, &path).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), set);
    let cfg = SolverConfig { solver: SolverKind::Exedec, budget: Budget::default(), run_seed: 1 };
    let out = dir.path().join("traces.jsonl");
    let traces = run_batch(&set, &cfg, 1, builtin, Some(&out), false, |_| {}).unwrap();
    assert_eq!(read_traces(&out).unwrap(), traces);
    std::fs::write(&out, "{\"solver\": \"tiips\"}\n").unwrap();
    let err = read_traces(&out).unwrap_err().to_string();
    assert!(err.contains("line 1"), "{err}");
}
