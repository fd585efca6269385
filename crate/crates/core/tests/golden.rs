//! Worked examples replayed step by step: a five-step string task and a list
//! task with a six-step detour under misleading guidance.

use tiips_core::benchgen::{GenCategory, Split, TaskRecord};
use tiips_core::engine::{solve_baseline, solve_exedec, solve_tiips, Budget, Outcome};
use tiips_core::inductive::Enumerator;
use tiips_core::metrics::{intent_match, syntactic_overlap};
use tiips_core::program::{self, Program, Subprogram};
use tiips_core::transductive::{OracleModel, SubgoalPrediction, TransductiveModel};
use tiips_core::{Domain, Example, IoSpec, Result, Value};

const NAMES_PROGRAM: &str = "GetAll(NUMBER) | Const('.') | Compose(ToCase(ALL_CAPS), GetToken(WORD, -1)) \
                             | Const(',') | Compose(ToCase(PROPER), GetToken(WORD, 1))";

fn names_spec() -> IoSpec {
    let pairs = [
        ("alan Turing1", "1.TURING,Alan"),
        ("21.Donald@knuTh", "21.KNUTH,Donald"),
        ("8:grace,HoppER&", "8.HOPPER,Grace"),
        ("EDSGER99 DIJKSTRA", "99.DIJKSTRA,Edsger"),
    ];
    IoSpec::new(Domain::String, pairs.iter().map(|(i, o)| Example::text(i, o).unwrap()).collect()).unwrap()
}

fn texts(xs: &[&str]) -> Vec<Value> {
    xs.iter().map(|s| Value::text(*s).unwrap()).collect()
}

#[test]
fn names_program_steps() {
    let spec = names_spec();
    let p = Program::parse(Domain::String, NAMES_PROGRAM).unwrap();
    assert_eq!(p.len(), 5);
    assert_eq!(
        p.run(&spec).unwrap(),
        texts(&["1.TURING,Alan", "21.KNUTH,Donald", "8.HOPPER,Grace", "99.DIJKSTRA,Edsger"])
    );

    let expected_steps = [
        texts(&["1", "21", "8", "99"]),
        texts(&[".", ".", ".", "."]),
        texts(&["TURING", "KNUTH", "HOPPER", "DIJKSTRA"]),
        texts(&[",", ",", ",", ","]),
        texts(&["Alan", "Donald", "Grace", "Edsger"]),
    ];
    let remaining = [".TURING,Alan", "TURING,Alan", ",Alan", "Alan", ""];
    let mut state = spec.clone();
    for ((step, want), rest) in p.steps().iter().zip(&expected_steps).zip(remaining) {
        let out = step.execute(&state).unwrap();
        assert_eq!(&out, want, "{step}");
        state = program::update(&state, &out).unwrap();
        assert_eq!(state.examples[0].output, Value::text(rest).unwrap());
        assert_eq!(state.examples[0].input_text(), Some("alan Turing1"));
    }
    assert!(program::is_solved(&state, None));
}

#[test]
fn names_exedec_with_oracle() {
    let spec = names_spec();
    let gt = Program::parse(Domain::String, NAMES_PROGRAM).unwrap();
    let task = TaskRecord::from_program("names", GenCategory::TrainDistribution, Split::Test, spec.clone(), gt, 0).unwrap();
    let trace = solve_exedec(&spec, &mut Enumerator::default(), &mut OracleModel::for_task(task.clone()), &Budget::default());
    assert_eq!(trace.outcome, Outcome::Solved);
    assert_eq!(trace.steps, 5);
    assert_eq!(trace.transductive_call_count, 5);
    assert_eq!(trace.guidance_records(), 5);
    assert!(trace.verify());
    assert_eq!(intent_match(&trace, &task), 1.0);

    let gt_steps: Vec<Subprogram> = task.gt_steps.iter().map(|s| s.subprogram.clone()).collect();
    let combined = program::combine(&gt_steps, &spec).unwrap();
    assert_eq!(combined.to_string(), task.ground_truth.to_string());
    assert_eq!(syntactic_overlap(&combined.steps(), &gt_steps), 1.0);
}

fn l(xs: &[i64]) -> Value {
    Value::list(xs.to_vec()).unwrap()
}

fn list_example(x0: i64, x1: &[i64], y: &[i64]) -> Example {
    Example::new([("x0".to_string(), Value::Int(x0)), ("x1".to_string(), l(x1))], l(y))
}

/// The cumulative-maximum task. The second example of the worked trace binds
/// an integer where the others bind lists, so it is left out.
fn cummax_spec() -> IoSpec {
    IoSpec::new(
        Domain::List,
        vec![list_example(1, &[-2, -25, 1], &[-2, -2, 1]), list_example(2, &[-28, -15], &[-28, -15])],
    )
    .unwrap()
}

const DETOUR: &str = "x0 = INPUT | x1 = INPUT | x2 = Sort x1 | x3 = Scanl1 (-) x2 | x4 = Scanl1 (-) x3 \
                      | x5 = Zip (min) x1 x4 | x6 = Zip (max) x1 x5 | x7 = Zip (max) x2 x6";

#[test]
fn detour_step_values() {
    let spec = cummax_spec();
    let p = Program::parse(Domain::List, DETOUR).unwrap();
    let outs = p.step_outputs(&spec).unwrap();
    let first: Vec<&Value> = outs.iter().map(|o| &o[0]).collect();
    assert_eq!(
        first,
        [
            &l(&[-25, -2, 1]),
            &l(&[-25, -23, -24]),
            &l(&[-25, -2, 22]),
            &l(&[-25, -25, 1]),
            &l(&[-2, -25, 1]),
            &l(&[-2, -2, 1]),
        ]
    );
    assert!(p.verify(&spec));
    let gt = Program::parse(Domain::List, "x0 = INPUT | x1 = INPUT | x2 = Scanl1 (max) x1").unwrap();
    assert_eq!(gt.run(&spec).unwrap(), p.run(&spec).unwrap());
}

#[test]
fn cummax_solved_in_one_step_without_guidance() {
    let spec = cummax_spec();
    let mut oracle = OracleModel::new();
    let tiips = solve_tiips(&spec, &mut Enumerator::default(), &mut oracle, &Budget::default());
    assert_eq!(tiips.outcome, Outcome::Solved);
    assert_eq!(tiips.steps, 1);
    assert_eq!(tiips.transductive_call_count, 0);
    assert_eq!(tiips.final_program.as_deref(), Some("x0 = INPUT | x1 = INPUT | x2 = Scanl1 (max) x1"));
    let base = solve_baseline(&spec, &mut Enumerator::default(), &Budget::default());
    assert_eq!(base.outcome, Outcome::Solved);
    assert_eq!(base.steps, 1);
    assert_eq!(base.guidance_records(), 0);
}

/// Replays a fixed list of subgoals, one per call.
struct Scripted {
    goals: Vec<Vec<Value>>,
    next: usize,
}

impl TransductiveModel for Scripted {
    fn predict_subgoals(&mut self, _spec: &IoSpec, _beam: usize) -> Result<Vec<SubgoalPrediction>> {
        let g = self.goals.get(self.next).cloned();
        self.next += 1;
        Ok(g.map(|outputs| SubgoalPrediction { outputs, score: 0.0 }).into_iter().collect())
    }
}

#[test]
fn exedec_follows_misleading_guidance() {
    let spec = cummax_spec();
    let detour = Program::parse(Domain::List, DETOUR).unwrap();
    let goals = detour.step_outputs(&spec).unwrap();
    let mut model = Scripted { goals, next: 0 };
    let trace = solve_exedec(&spec, &mut Enumerator::default(), &mut model, &Budget::default());
    assert_eq!(trace.outcome, Outcome::Solved);
    assert_eq!(trace.steps, 6);
    assert_eq!(trace.transductive_call_count, 6);
    assert!(trace.verify());
    // each guided step reproduced its subgoal exactly
    let predicted: Vec<_> = trace.attempts.iter().map(|a| a.predicted_subgoal.clone()).collect();
    let executed: Vec<_> = trace.attempts.iter().map(|a| a.executed.clone()).collect();
    assert_eq!(predicted, executed);

    let gt = Program::parse(Domain::List, "x0 = INPUT | x1 = INPUT | x2 = Scanl1 (max) x1").unwrap();
    let task = TaskRecord::from_program("cummax", GenCategory::TrainDistribution, Split::Test, spec, gt, 0).unwrap();
    // the detour's first step does not produce the cumulative maximum
    assert_eq!(intent_match(&trace, &task), 0.0);
}
