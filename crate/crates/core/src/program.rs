//! Domain-independent view of programs and their steps.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Result, SynthError};
use crate::list_dsl::{self, ListProgram, Statement, Var};
use crate::string_dsl::{self, StringExpr, StringProgram};
use crate::value::{Domain, IoSpec, Value};

/// One step: a string expression or a list statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Subprogram {
    Str(StringExpr),
    List(Statement),
}

/// A whole program in either domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Program {
    Str(StringProgram),
    List(ListProgram),
}

impl Subprogram {
    pub fn domain(&self) -> Domain {
        match self {
            Subprogram::Str(_) => Domain::String,
            Subprogram::List(_) => Domain::List,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Subprogram::Str(e) => e.size(),
            Subprogram::List(s) => s.expr.size(),
        }
    }

    /// Parse a step proposed against `spec`. List steps may omit the target
    /// (`Sort x1`); the target is always rebound to the next free variable.
    pub fn parse(text: &str, spec: &IoSpec) -> Result<Subprogram> {
        match spec.domain {
            Domain::String => string_dsl::parse_string_expr(text).map(Subprogram::Str),
            Domain::List => {
                let next = list_dsl::next_var(spec);
                let bound: Vec<Var> = list_dsl::bound_vars(spec).into_iter().map(|(v, _)| v).collect();
                let is_bound = |v: Var| bound.contains(&v);
                let stmt = if text.contains('=') {
                    list_dsl::parse_statement(text, &is_bound)?
                } else {
                    let full = format!("{next} = {text}");
                    list_dsl::parse_statement(&full, &is_bound).map_err(|e| match e {
                        SynthError::Parse(mut p) => {
                            p.position = p.position.saturating_sub(full.len() - text.len());
                            SynthError::Parse(p)
                        }
                        other => other,
                    })?
                };
                Ok(Subprogram::List(Statement { target: next, ..stmt }))
            }
        }
    }

    /// Per-example outputs of this step on the current state.
    pub fn execute(&self, spec: &IoSpec) -> Result<Vec<Value>> {
        match (self, spec.domain) {
            (Subprogram::Str(e), Domain::String) => spec
                .examples
                .iter()
                .map(|ex| {
                    let input = ex.input_text().expect("validated string spec");
                    string_dsl::eval_string_expr(e, input).and_then(Value::text)
                })
                .collect(),
            (Subprogram::List(s), Domain::List) => list_dsl::execute_on(&s.expr, spec),
            _ => Err(SynthError::TypeError("subprogram and specification domains differ".into())),
        }
    }
}

impl fmt::Display for Subprogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subprogram::Str(e) => e.fmt(f),
            Subprogram::List(s) => s.fmt(f),
        }
    }
}

/// The domain's task-update rule.
pub fn update(spec: &IoSpec, executed: &[Value]) -> Result<IoSpec> {
    match spec.domain {
        Domain::String => string_dsl::update_string_task(spec, executed),
        Domain::List => list_dsl::update_list_task(spec, executed),
    }
}

/// True iff the state has nothing left to do: empty remaining strings, or a
/// bound list variable (the latest) equal to the targets.
pub fn is_solved(spec: &IoSpec, last_executed: Option<&[Value]>) -> bool {
    match spec.domain {
        Domain::String => spec.targets().all(|t| t.as_text() == Some("")),
        Domain::List => last_executed.is_some_and(|e| spec.is_solved_by(e)),
    }
}

/// Join steps into one program for a task whose original spec is `original`.
pub fn combine(steps: &[Subprogram], original: &IoSpec) -> Result<Program> {
    if steps.is_empty() {
        return Err(SynthError::TypeError("cannot combine zero subprograms".into()));
    }
    match original.domain {
        Domain::String => {
            let exprs = steps
                .iter()
                .map(|s| match s {
                    Subprogram::Str(e) => Ok(e.clone()),
                    Subprogram::List(_) => Err(SynthError::TypeError("list step in a string program".into())),
                })
                .collect::<Result<_>>()?;
            Ok(Program::Str(StringProgram { exprs }))
        }
        Domain::List => {
            let num_inputs = original.examples[0].inputs.len() as u32;
            let mut rename: HashMap<Var, Var> = HashMap::new();
            let mut statements = Vec::with_capacity(steps.len());
            for (i, s) in steps.iter().enumerate() {
                let Subprogram::List(stmt) = s else {
                    return Err(SynthError::TypeError("string step in a list program".into()));
                };
                let expr = stmt.expr.map_vars(|v| rename.get(&v).copied().unwrap_or(v));
                let target = Var(num_inputs + i as u32);
                if expr.operands().iter().any(|(v, _)| *v >= target) {
                    return Err(SynthError::TypeError(format!("step {i} references an unbound variable")));
                }
                rename.insert(stmt.target, target);
                statements.push(Statement { target, expr });
            }
            Ok(Program::List(ListProgram { num_inputs, statements }))
        }
    }
}

impl Program {
    pub fn domain(&self) -> Domain {
        match self {
            Program::Str(_) => Domain::String,
            Program::List(_) => Domain::List,
        }
    }

    pub fn parse(domain: Domain, text: &str) -> Result<Program> {
        match domain {
            Domain::String => string_dsl::parse_string_program(text).map(Program::Str),
            Domain::List => list_dsl::parse_list_program(text).map(Program::List),
        }
    }

    pub fn steps(&self) -> Vec<Subprogram> {
        match self {
            Program::Str(p) => p.exprs.iter().cloned().map(Subprogram::Str).collect(),
            Program::List(p) => p.statements.iter().copied().map(Subprogram::List).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Program::Str(p) => p.exprs.len(),
            Program::List(p) => p.statements.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Final outputs on every example of `spec`.
    pub fn run(&self, spec: &IoSpec) -> Result<Vec<Value>> {
        match self {
            Program::Str(p) => spec
                .examples
                .iter()
                .map(|ex| {
                    let input = ex
                        .input_text()
                        .ok_or_else(|| SynthError::TypeError("string program needs a text input".into()))?;
                    string_dsl::eval_string_program(p, input).and_then(Value::text)
                })
                .collect(),
            Program::List(p) => spec
                .examples
                .iter()
                .map(|ex| {
                    let inputs: Vec<Value> = ex.inputs.values().cloned().collect();
                    list_dsl::eval_list_program(p, &inputs).map(|(v, _)| v)
                })
                .collect(),
        }
    }

    /// Per-step, per-example outputs from one replay of the program.
    pub fn step_outputs(&self, spec: &IoSpec) -> Result<Vec<Vec<Value>>> {
        let steps = self.steps();
        let mut out = Vec::with_capacity(steps.len());
        let mut state = spec.clone();
        for step in &steps {
            let executed = step.execute(&state)?;
            if spec.domain == Domain::List {
                state = update(&state, &executed)?;
            }
            out.push(executed);
        }
        Ok(out)
    }

    /// Independent check that the program reproduces every output.
    pub fn verify(&self, spec: &IoSpec) -> bool {
        self.domain() == spec.domain && self.run(spec).is_ok_and(|outs| spec.is_solved_by(&outs))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Str(p) => p.fmt(f),
            Program::List(p) => p.fmt(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Example;

    fn list_spec() -> IoSpec {
        let ex = Example::new(
            [
                ("x0".to_string(), Value::Int(1)),
                ("x1".to_string(), Value::list(vec![-2, -25, 1]).unwrap()),
            ],
            Value::list(vec![-2, -2, 1]).unwrap(),
        );
        IoSpec::new(Domain::List, vec![ex]).unwrap()
    }

    #[test]
    fn parse_step_without_target_binds_next() {
        let spec = list_spec();
        let s = Subprogram::parse("Scanl1 (max) x1", &spec).unwrap();
        assert_eq!(s.to_string(), "x2 = Scanl1 (max) x1");
        let s = Subprogram::parse("x7 = Sort x1", &spec).unwrap();
        assert_eq!(s.to_string(), "x2 = Sort x1");
        assert!(Subprogram::parse("Sort x2", &spec).is_err());
    }

    #[test]
    fn combine_renames_list_targets() {
        let spec = list_spec();
        let a = Subprogram::List(list_dsl::parse_statement("x5 = Sort x1", &|_| true).unwrap());
        let b = Subprogram::List(list_dsl::parse_statement("x9 = Zip (max) x1 x5", &|_| true).unwrap());
        let p = combine(&[a, b], &spec).unwrap();
        assert_eq!(p.to_string(), "x0 = INPUT | x1 = INPUT | x2 = Sort x1 | x3 = Zip (max) x1 x2");
        let single = Subprogram::parse("Scanl1 (max) x1", &spec).unwrap();
        let p = combine(&[single.clone()], &spec).unwrap();
        assert_eq!(p.steps(), vec![single]);
        assert!(p.verify(&spec));
    }

    #[test]
    fn combine_rejects_mixed_domains() {
        let spec = list_spec();
        let s = Subprogram::Str(string_dsl::parse_string_expr("Const('.')").unwrap());
        assert!(combine(&[s], &spec).is_err());
    }
}
