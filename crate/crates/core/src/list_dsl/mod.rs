//! Integer-list DSL: straight-line programs of single-operation statements.

mod ast;
mod eval;
mod syntax;

pub use ast::*;
pub use eval::{eval_in, eval_list_expr, eval_list_program, Environment};
pub use syntax::{parse_list_program, parse_statement, render_list_program};

use crate::error::{Result, SynthError};
use crate::value::{Domain, IoSpec, Value};

/// Bind the executed values as the next variable in every example.
pub fn update_list_task(spec: &IoSpec, executed: &[Value]) -> Result<IoSpec> {
    if spec.domain != Domain::List {
        return Err(SynthError::TypeError("expected a list-domain specification".into()));
    }
    if executed.len() != spec.len() {
        return Err(SynthError::TypeError(format!(
            "expected {} executed values, got {}",
            spec.len(),
            executed.len()
        )));
    }
    let next = next_var(spec);
    let mut examples = spec.examples.clone();
    for (ex, v) in examples.iter_mut().zip(executed) {
        if matches!(v, Value::Text(_)) {
            return Err(SynthError::TypeError("list updates cannot bind text".into()));
        }
        if ex.inputs.insert(next.name(), v.clone()).is_some() {
            return Err(SynthError::TypeError(format!("{next} is already bound")));
        }
    }
    IoSpec::new(Domain::List, examples)
}

/// The variable a new statement on `spec` would bind.
pub fn next_var(spec: &IoSpec) -> Var {
    Var(spec.examples[0].inputs.len() as u32)
}

/// Variables bound in `spec` with their types.
pub fn bound_vars(spec: &IoSpec) -> Vec<(Var, Ty)> {
    spec.examples[0]
        .inputs
        .iter()
        .filter_map(|(name, v)| {
            let ty = match v {
                Value::Int(_) => Ty::Int,
                Value::IntList(_) => Ty::List,
                Value::Text(_) => return None,
            };
            Var::parse(name).map(|var| (var, ty))
        })
        .collect()
}

/// Execute one statement's expression on every example of `spec`.
pub fn execute_on(expr: &ListExpr, spec: &IoSpec) -> Result<Vec<Value>> {
    spec.examples.iter().map(|ex| eval_in(expr, &ex.inputs)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;
    use crate::value::Example;
    use proptest::prelude::*;

    fn l(xs: &[i64]) -> Value {
        Value::list(xs.to_vec()).unwrap()
    }

    fn run(src: &str, inputs: &[Value]) -> Result<Value> {
        let p = parse_list_program(src)?;
        eval_list_program(&p, inputs).map(|(v, _)| v)
    }

    #[test]
    fn primitive_semantics() {
        let xs = l(&[3, -1, 4, -1, 5]);
        let cases = [
            ("x0 = INPUT | x1 = Head x0", Value::Int(3)),
            ("x0 = INPUT | x1 = Last x0", Value::Int(5)),
            ("x0 = INPUT | x1 = Minimum x0", Value::Int(-1)),
            ("x0 = INPUT | x1 = Maximum x0", Value::Int(5)),
            ("x0 = INPUT | x1 = Sum x0", Value::Int(10)),
            ("x0 = INPUT | x1 = Reverse x0", l(&[5, -1, 4, -1, 3])),
            ("x0 = INPUT | x1 = Sort x0", l(&[-1, -1, 3, 4, 5])),
            ("x0 = INPUT | x1 = Map (*(-1)) x0", l(&[-3, 1, -4, 1, -5])),
            ("x0 = INPUT | x1 = Map (/2) x0", l(&[1, 0, 2, 0, 2])),
            ("x0 = INPUT | x1 = Filter (%2==1) x0", l(&[3, -1, -1, 5])),
            ("x0 = INPUT | x1 = Count (<0) x0", Value::Int(2)),
            ("x0 = INPUT | x1 = Scanl1 (+) x0", l(&[3, 2, 6, 5, 10])),
            ("x0 = INPUT | x1 = Scanl1 (max) x0", l(&[3, 3, 4, 4, 5])),
        ];
        for (src, want) in cases {
            assert_eq!(run(src, &[xs.clone()]).unwrap(), want, "{src}");
        }
    }

    #[test]
    fn access_take_drop() {
        let xs = l(&[7, 8, 9]);
        let p = |n: i64, src: &str| run(src, &[Value::Int(n), xs.clone()]);
        assert_eq!(p(0, "x0 = INPUT | x1 = INPUT | x2 = Access x0 x1").unwrap(), Value::Int(7));
        assert_eq!(p(2, "x0 = INPUT | x1 = INPUT | x2 = Access x0 x1").unwrap(), Value::Int(9));
        for bad in [3, -1] {
            let e = p(bad, "x0 = INPUT | x1 = INPUT | x2 = Access x0 x1").unwrap_err();
            assert_eq!(e.kind(), ErrorKind::ExecFailure);
        }
        assert_eq!(p(5, "x0 = INPUT | x1 = INPUT | x2 = Take x0 x1").unwrap(), xs);
        assert_eq!(p(-2, "x0 = INPUT | x1 = INPUT | x2 = Take x0 x1").unwrap(), l(&[]));
        assert_eq!(p(1, "x0 = INPUT | x1 = INPUT | x2 = Drop x0 x1").unwrap(), l(&[8, 9]));
        assert_eq!(p(9, "x0 = INPUT | x1 = INPUT | x2 = Drop x0 x1").unwrap(), l(&[]));
    }

    #[test]
    fn zip_truncates_and_empty_failures() {
        let src = "x0 = INPUT | x1 = INPUT | x2 = Zip (-) x0 x1";
        assert_eq!(run(src, &[l(&[5, 6, 7]), l(&[1, 1])]).unwrap(), l(&[4, 5]));
        for op in ["Head", "Last", "Minimum", "Maximum", "Scanl1 (+)"] {
            let e = run(&format!("x0 = INPUT | x1 = {op} x0"), &[l(&[])]).unwrap_err();
            assert_eq!(e.kind(), ErrorKind::ExecFailure, "{op}");
        }
        assert_eq!(run("x0 = INPUT | x1 = Sum x0", &[l(&[])]).unwrap(), Value::Int(0));
    }

    #[test]
    fn range_and_type_errors() {
        let e = run("x0 = INPUT | x1 = Map (*4) x0", &[l(&[100])]).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::RangeViolation);
        let e = run("x0 = INPUT | x1 = Scanl1 (+) x0", &[l(&[200, 100])]).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::RangeViolation);
        let e = run("x0 = INPUT | x1 = Sort x0", &[Value::Int(3)]).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::TypeError);
    }

    #[test]
    fn parse_rejects_unbound_and_garbage() {
        for src in [
            "x0 = INPUT | x1 = Sort x2",
            "x0 = INPUT | x1 = Sort x1",
            "x0 = INPUT | x1 = Srot x0",
            "x0 = INPUT | x1 = Map (+7) x0",
            "x0 = INPUT | x2 = Sort x0",
            "x0 = INPUT | x1 = Sort x0 x0",
            "x0 = INPUT",
        ] {
            let e = parse_list_program(src).unwrap_err();
            assert_eq!(e.kind(), ErrorKind::ParseError, "{src}");
        }
        let SynthError::Parse(pe) = parse_list_program("x0 = INPUT | x1 = Sort x5").unwrap_err() else {
            panic!()
        };
        assert_eq!(pe.position, 23);
    }

    #[test]
    fn round_trip() {
        let src = "x0 = INPUT | x1 = INPUT | x2 = Sort x1 | x3 = Scanl1 (-) x2 \
                   | x4 = Zip (min) x1 x3 | x5 = Map (**2) x4 | x6 = Count (%2==0) x5 \
                   | x7 = Take x6 x4 | x8 = Filter (>0) x7";
        let p = parse_list_program(src).unwrap();
        assert_eq!(render_list_program(&p), src);
        assert_eq!(parse_list_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn statement_parse_against_bound_vars() {
        let s = parse_statement("x3 = Zip (max) x1 x2", &|v| v.0 < 3).unwrap();
        assert_eq!(s.to_string(), "x3 = Zip (max) x1 x2");
        assert!(parse_statement("x3 = Zip (max) x1 x4", &|v| v.0 < 3).is_err());
    }

    #[test]
    fn update_binds_next_variable() {
        let spec = IoSpec::new(
            Domain::List,
            vec![Example::new([("x0".to_string(), l(&[2, 1]))], l(&[1, 2]))],
        )
        .unwrap();
        assert_eq!(next_var(&spec), Var(1));
        let up = update_list_task(&spec, &[l(&[1, 2])]).unwrap();
        assert_eq!(up.examples[0].inputs["x1"], l(&[1, 2]));
        assert_eq!(up.examples[0].output, l(&[1, 2]));
        assert_eq!(bound_vars(&up), vec![(Var(0), Ty::List), (Var(1), Ty::List)]);
    }

    fn arb_list() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-50i64..=50, 0..=10)
    }

    proptest! {
        #[test]
        fn sort_is_ordered_permutation(xs in arb_list()) {
            let Value::IntList(s) = run("x0 = INPUT | x1 = Sort x0", &[l(&xs)]).unwrap() else { unreachable!() };
            prop_assert!(s.windows(2).all(|w| w[0] <= w[1]));
            let mut a = xs.clone();
            a.sort();
            prop_assert_eq!(a, s);
        }

        #[test]
        fn reverse_twice_is_identity(xs in arb_list()) {
            let out = run("x0 = INPUT | x1 = Reverse x0 | x2 = Reverse x1", &[l(&xs)]).unwrap();
            prop_assert_eq!(out, l(&xs));
        }

        #[test]
        fn take_drop_partition(xs in arb_list(), n in -3i64..15) {
            let t = run("x0 = INPUT | x1 = INPUT | x2 = Take x0 x1", &[Value::Int(n), l(&xs)]).unwrap();
            let d = run("x0 = INPUT | x1 = INPUT | x2 = Drop x0 x1", &[Value::Int(n), l(&xs)]).unwrap();
            let mut joined = t.as_list().unwrap().to_vec();
            joined.extend_from_slice(d.as_list().unwrap());
            prop_assert_eq!(joined, xs);
        }

        #[test]
        fn filter_count_agree(xs in arb_list()) {
            let f = run("x0 = INPUT | x1 = Filter (>0) x0", &[l(&xs)]).unwrap();
            let c = run("x0 = INPUT | x1 = Count (>0) x0", &[l(&xs)]).unwrap();
            prop_assert_eq!(f.as_list().unwrap().len() as i64, c.as_int().unwrap());
        }
    }
}
