//! String-manipulation DSL: programs are concatenations of expressions.

mod ast;
mod eval;
mod syntax;

pub use ast::*;
pub use eval::{
    apply_modification, eval_chars, eval_string_expr, find_matches, regex_id, resolve_index,
    substring_span, MatchTable, Span, REGEX_COUNT,
};
pub use syntax::{parse_string_expr, parse_string_program, render_string_program};

use crate::error::{Result, SynthError};
use crate::value::{Domain, IoSpec, Value};

/// Concatenate per-expression results. Failures name the expression index.
pub fn eval_string_program(p: &StringProgram, input: &str) -> Result<String> {
    let mut out = String::new();
    for (i, e) in p.exprs.iter().enumerate() {
        match eval_string_expr(e, input) {
            Ok(s) => out.push_str(&s),
            Err(SynthError::ExecFailure(msg)) => {
                return Err(SynthError::ExecFailure(format!("expression {i}: {msg}")))
            }
            Err(other) => return Err(other),
        }
    }
    Ok(out)
}

/// Remove each executed text from the front of its remaining target.
pub fn update_string_task(spec: &IoSpec, executed: &[Value]) -> Result<IoSpec> {
    if spec.domain != Domain::String {
        return Err(SynthError::TypeError("expected a string-domain specification".into()));
    }
    if executed.len() != spec.len() {
        return Err(SynthError::TypeError(format!(
            "expected {} executed values, got {}",
            spec.len(),
            executed.len()
        )));
    }
    let mut targets = Vec::with_capacity(executed.len());
    for (i, (ex, out)) in spec.examples.iter().zip(executed).enumerate() {
        let (Some(target), Some(out)) = (ex.output.as_text(), out.as_text()) else {
            return Err(SynthError::TypeError("string updates need text values".into()));
        };
        match target.strip_prefix(out) {
            Some(rest) => targets.push(Value::Text(rest.to_string())),
            None => {
                return Err(SynthError::NotAPrefix(format!(
                    "example {i}: {out:?} is not a prefix of {target:?}"
                )))
            }
        }
    }
    spec.with_targets(targets)
}
