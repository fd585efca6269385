//! Transductive (subgoal) models: predict the next step's per-example outputs.

use crate::benchgen::TaskRecord;
use crate::error::{Result, SynthError};
use crate::string_dsl::DELIMITERS;
use crate::value::{Domain, IoSpec, Value};

/// Predicted outputs of the next step, one per example.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgoalPrediction {
    pub outputs: Vec<Value>,
    pub score: f64,
}

pub trait TransductiveModel {
    /// Called once before solving `task`.
    fn begin_task(&mut self, _task: &TaskRecord) {}

    /// Ranked predictions for the state `spec`, at most `beam`.
    fn predict_subgoals(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<SubgoalPrediction>>;
}

/// Ground-truth outputs of step `consumed_steps`.
pub fn oracle_subgoals(spec: &IoSpec, task: &TaskRecord, consumed_steps: usize) -> Result<SubgoalPrediction> {
    let step = task.gt_steps.get(consumed_steps).ok_or_else(|| {
        SynthError::BudgetExhausted(format!("all {} ground-truth steps consumed", task.gt_steps.len()))
    })?;
    if step.outputs.len() != spec.len() {
        return Err(SynthError::TypeError("specification and task differ in example count".into()));
    }
    Ok(SubgoalPrediction { outputs: step.outputs.clone(), score: 0.0 })
}

/// How many ground-truth steps the state `spec` has already performed.
///
/// States on the ground-truth path are matched exactly. List states off the
/// path fall back to the number of variables bound beyond the task inputs.
pub fn consumed_steps(spec: &IoSpec, task: &TaskRecord) -> Option<usize> {
    if spec.domain != task.domain || spec.len() != task.spec.len() {
        return None;
    }
    let chain = task.state_chain().ok()?;
    if let Some(c) = chain[..chain.len() - 1].iter().position(|s| s == spec) {
        return Some(c);
    }
    match spec.domain {
        Domain::String => None,
        Domain::List => {
            let k = task.spec.examples[0].inputs.len();
            let same_task = spec.examples.iter().zip(&task.spec.examples).all(|(a, b)| {
                a.output == b.output && a.inputs.len() >= k && a.inputs.iter().take(k).eq(b.inputs.iter())
            });
            let extra = spec.examples[0].inputs.len() - k.min(spec.examples[0].inputs.len());
            (same_task && extra < task.gt_steps.len()).then_some(extra)
        }
    }
}

/// A subtask: the current inputs paired with predicted outputs.
pub fn build_subtask(spec: &IoSpec, prediction: &SubgoalPrediction) -> Result<IoSpec> {
    if prediction.outputs.len() != spec.len() {
        return Err(SynthError::TypeError(format!(
            "prediction has {} outputs for {} examples",
            prediction.outputs.len(),
            spec.len()
        )));
    }
    let ok = match spec.domain {
        Domain::String => prediction.outputs.iter().all(|v| matches!(v, Value::Text(_))),
        Domain::List => prediction.outputs.iter().all(|v| !matches!(v, Value::Text(_))),
    };
    if !ok {
        return Err(SynthError::TypeError(format!("prediction does not fit the {} domain", spec.domain)));
    }
    spec.with_targets(prediction.outputs.clone())
}

/// Ground-truth guidance for the task announced through `begin_task`.
#[derive(Debug, Clone, Default)]
pub struct OracleModel {
    task: Option<TaskRecord>,
}

impl OracleModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn for_task(task: TaskRecord) -> Self {
        OracleModel { task: Some(task) }
    }
}

impl TransductiveModel for OracleModel {
    fn begin_task(&mut self, task: &TaskRecord) {
        self.task = Some(task.clone());
    }

    fn predict_subgoals(&mut self, spec: &IoSpec, _beam: usize) -> Result<Vec<SubgoalPrediction>> {
        let task = self
            .task
            .as_ref()
            .ok_or_else(|| SynthError::TypeError("oracle has no task".into()))?;
        let c = consumed_steps(spec, task)
            .ok_or_else(|| SynthError::BudgetExhausted("state is not on the ground-truth path".into()))?;
        Ok(vec![oracle_subgoals(spec, task, c)?])
    }
}

/// Model-free string predictor: the first k delimiter-separated tokens of
/// every remaining target, for k = 1, 2, ...
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicModel;

/// Split at delimiter boundaries: each delimiter is a token, as is each run between them.
pub fn delimiter_tokens(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in s.char_indices() {
        if DELIMITERS.contains(&c) {
            if start < i {
                out.push(&s[start..i]);
            }
            out.push(&s[i..i + c.len_utf8()]);
            start = i + c.len_utf8();
        }
    }
    if start < s.len() {
        out.push(&s[start..]);
    }
    out
}

impl TransductiveModel for HeuristicModel {
    fn predict_subgoals(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<SubgoalPrediction>> {
        if spec.domain != Domain::String {
            return Err(SynthError::TypeError("the heuristic predictor handles strings only".into()));
        }
        let tokens: Vec<Vec<&str>> = spec
            .targets()
            .map(|t| delimiter_tokens(t.as_text().unwrap_or("")))
            .collect();
        let longest = tokens.iter().map(Vec::len).max().unwrap_or(0);
        let mut out: Vec<SubgoalPrediction> = Vec::new();
        for k in 1..=longest.min(beam) {
            let outputs = tokens
                .iter()
                .map(|ts| Value::text(ts[..k.min(ts.len())].concat()))
                .collect::<Result<Vec<_>>>()?;
            if out.last().is_some_and(|p| p.outputs == outputs) {
                continue;
            }
            out.push(SubgoalPrediction { outputs, score: -(k as f64) });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Example;

    fn spec(pairs: &[(&str, &str)]) -> IoSpec {
        IoSpec::new(Domain::String, pairs.iter().map(|(i, o)| Example::text(i, o).unwrap()).collect()).unwrap()
    }

    #[test]
    fn subtask_keeps_inputs() {
        let s = spec(&[("alan Turing1", "1.TURING,Alan")]);
        let p = SubgoalPrediction { outputs: vec![Value::text("1").unwrap()], score: 0.0 };
        let sub = build_subtask(&s, &p).unwrap();
        assert_eq!(sub.examples[0].input_text(), Some("alan Turing1"));
        assert_eq!(sub.examples[0].output, Value::text("1").unwrap());
        let same = SubgoalPrediction { outputs: s.targets().cloned().collect(), score: 0.0 };
        assert_eq!(build_subtask(&s, &same).unwrap(), s);
        let bad = SubgoalPrediction { outputs: vec![Value::Int(3)], score: 0.0 };
        assert_eq!(build_subtask(&s, &bad).unwrap_err().kind(), crate::error::ErrorKind::TypeError);
    }

    #[test]
    fn heuristic_tokens() {
        assert_eq!(delimiter_tokens("1.TURING,Alan"), ["1", ".", "TURING", ",", "Alan"]);
        let s = spec(&[("a", "1.TURING,Alan"), ("b", "21.KNUTH,Donald")]);
        let preds = HeuristicModel.predict_subgoals(&s, 3).unwrap();
        assert_eq!(preds[0].outputs, vec![Value::text("1").unwrap(), Value::text("21").unwrap()]);
        assert_eq!(preds[1].outputs[0], Value::text("1.").unwrap());
        assert_eq!(preds.len(), 3);
    }
}
