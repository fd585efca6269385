use indexmap::IndexMap;

use super::ast::*;
use crate::error::{Result, SynthError};
use crate::value::{check_int, Value, MAX_LIST_LEN};

/// Variable bindings of one example. Bindings are never overwritten.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment {
    bindings: IndexMap<String, Value>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bindings(bindings: IndexMap<String, Value>) -> Self {
        Environment { bindings }
    }

    pub fn get(&self, v: Var) -> Option<&Value> {
        lookup(&self.bindings, v)
    }

    pub fn bind(&mut self, v: Var, value: Value) -> Result<()> {
        let name = v.name();
        if self.bindings.contains_key(&name) {
            return Err(SynthError::TypeError(format!("{name} is already bound")));
        }
        self.bindings.insert(name, value);
        Ok(())
    }

    pub fn bindings(&self) -> &IndexMap<String, Value> {
        &self.bindings
    }

    pub fn into_bindings(self) -> IndexMap<String, Value> {
        self.bindings
    }
}

fn lookup(b: &IndexMap<String, Value>, v: Var) -> Option<&Value> {
    // variable names follow xN, so position N is the binding in nearly all states
    if let Some((name, value)) = b.get_index(v.0 as usize) {
        if Var::parse(name) == Some(v) {
            return Some(value);
        }
    }
    b.get(&v.name())
}

fn list_arg<'a>(b: &'a IndexMap<String, Value>, v: Var) -> Result<&'a [i64]> {
    match lookup(b, v) {
        Some(Value::IntList(xs)) => Ok(xs),
        Some(_) => Err(SynthError::TypeError(format!("{v} is not a list"))),
        None => Err(SynthError::TypeError(format!("{v} is unbound"))),
    }
}

fn int_arg(b: &IndexMap<String, Value>, v: Var) -> Result<i64> {
    match lookup(b, v) {
        Some(Value::Int(n)) => Ok(*n),
        Some(_) => Err(SynthError::TypeError(format!("{v} is not an integer"))),
        None => Err(SynthError::TypeError(format!("{v} is unbound"))),
    }
}

fn int(n: i64) -> Result<Value> {
    check_int(n).map(Value::Int)
}

fn list(xs: Vec<i64>) -> Result<Value> {
    for &x in &xs {
        check_int(x)?;
    }
    debug_assert!(xs.len() <= MAX_LIST_LEN);
    Ok(Value::IntList(xs))
}

fn nonempty<'a>(xs: &'a [i64], op: &str) -> Result<&'a [i64]> {
    if xs.is_empty() {
        Err(SynthError::exec(format!("{op} of an empty list")))
    } else {
        Ok(xs)
    }
}

/// Evaluate an expression against raw bindings (as stored in examples).
pub fn eval_in(expr: &ListExpr, b: &IndexMap<String, Value>) -> Result<Value> {
    use ListExpr::*;
    match *expr {
        Head(l) => int(nonempty(list_arg(b, l)?, "Head")?[0]),
        Last(l) => int(*nonempty(list_arg(b, l)?, "Last")?.last().unwrap()),
        Access(n, l) => {
            let i = int_arg(b, n)?;
            let xs = list_arg(b, l)?;
            if i < 0 || i as usize >= xs.len() {
                return Err(SynthError::exec(format!("Access index {i} out of bounds")));
            }
            int(xs[i as usize])
        }
        Minimum(l) => int(*nonempty(list_arg(b, l)?, "Minimum")?.iter().min().unwrap()),
        Maximum(l) => int(*nonempty(list_arg(b, l)?, "Maximum")?.iter().max().unwrap()),
        Sum(l) => int(list_arg(b, l)?.iter().sum()),
        Take(n, l) => {
            let xs = list_arg(b, l)?;
            let k = int_arg(b, n)?.clamp(0, xs.len() as i64) as usize;
            list(xs[..k].to_vec())
        }
        Drop(n, l) => {
            let xs = list_arg(b, l)?;
            let k = int_arg(b, n)?.clamp(0, xs.len() as i64) as usize;
            list(xs[k..].to_vec())
        }
        Reverse(l) => list(list_arg(b, l)?.iter().rev().copied().collect()),
        Sort(l) => {
            let mut xs = list_arg(b, l)?.to_vec();
            xs.sort_unstable();
            list(xs)
        }
        Map(f, l) => list(list_arg(b, l)?.iter().map(|&x| f.apply(x)).collect()),
        Filter(p, l) => list(list_arg(b, l)?.iter().copied().filter(|&x| p.test(x)).collect()),
        Count(p, l) => int(list_arg(b, l)?.iter().filter(|&&x| p.test(x)).count() as i64),
        Zip(op, x, y) => {
            let xs = list_arg(b, x)?;
            let ys = list_arg(b, y)?;
            list(xs.iter().zip(ys).map(|(&a, &c)| op.apply(a, c)).collect())
        }
        Scanl1(op, l) => {
            let xs = nonempty(list_arg(b, l)?, "Scanl1")?;
            let mut out = Vec::with_capacity(xs.len());
            let mut acc = xs[0];
            out.push(acc);
            for &x in &xs[1..] {
                acc = check_int(op.apply(acc, x))?;
                out.push(acc);
            }
            list(out)
        }
    }
}

pub fn eval_list_expr(expr: &ListExpr, env: &Environment) -> Result<Value> {
    eval_in(expr, &env.bindings)
}

/// Run every statement in order; returns the last binding and the full environment.
pub fn eval_list_program(p: &ListProgram, inputs: &[Value]) -> Result<(Value, Environment)> {
    if inputs.len() != p.num_inputs as usize {
        return Err(SynthError::TypeError(format!(
            "program declares {} inputs, got {}",
            p.num_inputs,
            inputs.len()
        )));
    }
    let mut env = Environment::new();
    for (v, value) in p.input_vars().zip(inputs) {
        if matches!(value, Value::Text(_)) {
            return Err(SynthError::TypeError("list inputs cannot be text".into()));
        }
        env.bind(v, value.clone())?;
    }
    for (i, s) in p.statements.iter().enumerate() {
        let value = eval_list_expr(&s.expr, &env).map_err(|e| match e {
            SynthError::ExecFailure(m) => SynthError::ExecFailure(format!("statement {i}: {m}")),
            SynthError::RangeViolation(m) => SynthError::RangeViolation(format!("statement {i}: {m}")),
            SynthError::TypeError(m) => SynthError::TypeError(format!("statement {i}: {m}")),
            other => other,
        })?;
        env.bind(s.target, value)?;
    }
    let out = env.get(p.output_var()).cloned().expect("output bound");
    Ok((out, env))
}
