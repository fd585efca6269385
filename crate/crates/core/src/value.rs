//! Runtime values, examples and input/output specifications.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SynthError};

pub const INT_MIN: i64 = -256;
pub const INT_MAX: i64 = 255;
pub const MAX_LIST_LEN: usize = 20;
pub const MAX_TEXT_LEN: usize = 100;
pub const MAX_EXAMPLES: usize = 8;

/// Name of the single input bound in string-domain examples.
pub const STRING_INPUT: &str = "x0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    String,
    List,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::String => "string",
            Domain::List => "list",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "string" => Ok(Domain::String),
            "list" => Ok(Domain::List),
            other => Err(format!("unknown domain `{other}` (expected string|list)")),
        }
    }
}

/// A runtime datum. Construct through the checked constructors so that the
/// range invariants always hold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged, try_from = "RawValue")]
pub enum Value {
    Int(i64),
    IntList(Vec<i64>),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValue {
    Int(i64),
    IntList(Vec<i64>),
    Text(String),
}

impl TryFrom<RawValue> for Value {
    type Error = SynthError;

    fn try_from(raw: RawValue) -> Result<Self> {
        match raw {
            RawValue::Int(n) => Value::int(n),
            RawValue::IntList(xs) => Value::list(xs),
            RawValue::Text(s) => Value::text(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Int,
    IntList,
    Text,
}

pub(crate) fn check_int(n: i64) -> Result<i64> {
    if (INT_MIN..=INT_MAX).contains(&n) {
        Ok(n)
    } else {
        Err(SynthError::RangeViolation(format!(
            "integer {n} outside [{INT_MIN}, {INT_MAX}]"
        )))
    }
}

impl Value {
    pub fn int(n: i64) -> Result<Self> {
        check_int(n).map(Value::Int)
    }

    pub fn list(xs: Vec<i64>) -> Result<Self> {
        if xs.len() > MAX_LIST_LEN {
            return Err(SynthError::RangeViolation(format!(
                "list length {} exceeds {MAX_LIST_LEN}",
                xs.len()
            )));
        }
        for &x in &xs {
            check_int(x)?;
        }
        Ok(Value::IntList(xs))
    }

    pub fn text(s: impl Into<String>) -> Result<Self> {
        let s = s.into();
        let n = s.chars().count();
        if n > MAX_TEXT_LEN {
            return Err(SynthError::RangeViolation(format!(
                "text of {n} code points exceeds {MAX_TEXT_LEN}"
            )));
        }
        Ok(Value::Text(s))
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::IntList(_) => ValueKind::IntList,
            Value::Text(_) => ValueKind::Text,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[i64]> {
        match self {
            Value::IntList(xs) => Some(xs),
            _ => None,
        }
    }
}

/// Structural equality: same variant and payload, exact code points for text.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    a == b
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::IntList(xs) => {
                f.write_str("[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Value::Text(s) => write!(f, "{s:?}"),
        }
    }
}

/// One input/output pair. Inputs keep their binding order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example {
    pub inputs: IndexMap<String, Value>,
    pub output: Value,
}

impl Example {
    pub fn new(inputs: impl IntoIterator<Item = (String, Value)>, output: Value) -> Self {
        Example {
            inputs: inputs.into_iter().collect(),
            output,
        }
    }

    /// A string-domain example with its single text input.
    pub fn text(input: &str, output: &str) -> Result<Self> {
        Ok(Example::new(
            [(STRING_INPUT.to_string(), Value::text(input)?)],
            Value::text(output)?,
        ))
    }

    pub fn input_text(&self) -> Option<&str> {
        self.inputs.get(STRING_INPUT).and_then(Value::as_text)
    }
}

/// A set of examples in one domain, type-consistent across examples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoSpec {
    pub domain: Domain,
    pub examples: Vec<Example>,
}

impl IoSpec {
    pub fn new(domain: Domain, examples: Vec<Example>) -> Result<Self> {
        if examples.is_empty() || examples.len() > MAX_EXAMPLES {
            return Err(SynthError::TypeError(format!(
                "a specification needs 1..={MAX_EXAMPLES} examples, got {}",
                examples.len()
            )));
        }
        let first = &examples[0];
        match domain {
            Domain::String => {
                for ex in &examples {
                    if ex.inputs.len() != 1 || ex.input_text().is_none() {
                        return Err(SynthError::TypeError(
                            "string examples bind exactly one text input x0".into(),
                        ));
                    }
                    if ex.output.kind() != ValueKind::Text {
                        return Err(SynthError::TypeError("string outputs must be text".into()));
                    }
                }
            }
            Domain::List => {
                for ex in &examples {
                    if ex.inputs.len() != first.inputs.len() {
                        return Err(SynthError::TypeError(
                            "examples bind different numbers of inputs".into(),
                        ));
                    }
                    for ((name, v), (name0, v0)) in ex.inputs.iter().zip(&first.inputs) {
                        if name != name0 || v.kind() != v0.kind() {
                            return Err(SynthError::TypeError(format!(
                                "input `{name}` is not type-consistent across examples"
                            )));
                        }
                        if v.kind() == ValueKind::Text {
                            return Err(SynthError::TypeError("list inputs cannot be text".into()));
                        }
                    }
                    if ex.output.kind() != first.output.kind()
                        || ex.output.kind() == ValueKind::Text
                    {
                        return Err(SynthError::TypeError(
                            "list outputs must share one Int or IntList variant".into(),
                        ));
                    }
                }
            }
        }
        Ok(IoSpec { domain, examples })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn targets(&self) -> impl Iterator<Item = &Value> {
        self.examples.iter().map(|e| &e.output)
    }

    /// Replace every example's output, keeping inputs. Used for subtasks.
    pub fn with_targets(&self, targets: Vec<Value>) -> Result<Self> {
        if targets.len() != self.examples.len() {
            return Err(SynthError::TypeError(format!(
                "expected {} targets, got {}",
                self.examples.len(),
                targets.len()
            )));
        }
        let examples = self
            .examples
            .iter()
            .zip(targets)
            .map(|(ex, t)| Example {
                inputs: ex.inputs.clone(),
                output: t,
            })
            .collect();
        IoSpec::new(self.domain, examples)
    }

    /// True iff the given per-example values equal the targets.
    pub fn is_solved_by(&self, outputs: &[Value]) -> bool {
        outputs.len() == self.examples.len()
            && self
                .examples
                .iter()
                .zip(outputs)
                .all(|(ex, o)| values_equal(&ex.output, o))
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.examples[0].inputs.keys().map(String::as_str).collect()
    }
}

impl<'de> Deserialize<'de> for IoSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            domain: Domain,
            examples: Vec<Example>,
        }
        let raw = Raw::deserialize(d)?;
        IoSpec::new(raw.domain, raw.examples).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_examples() {
        assert!(values_equal(&Value::text("abc").unwrap(), &Value::text("abc").unwrap()));
        assert!(values_equal(
            &Value::list(vec![-2, -2, 1]).unwrap(),
            &Value::list(vec![-2, -2, 1]).unwrap()
        ));
        assert!(!values_equal(&Value::int(5).unwrap(), &Value::list(vec![5]).unwrap()));
    }

    #[test]
    fn out_of_range_is_rejected_not_clamped() {
        assert_eq!(
            Value::int(256).unwrap_err().kind(),
            crate::error::ErrorKind::RangeViolation
        );
        assert!(Value::int(-257).is_err());
        assert!(Value::list(vec![0; 21]).is_err());
        assert!(Value::list(vec![1, 300]).is_err());
        assert!(Value::text("a".repeat(101)).is_err());
        assert!(Value::text("´".repeat(100)).is_ok());
    }

    #[test]
    fn json_encoding() {
        let v: Value = serde_json::from_str("[1,-2]").unwrap();
        assert_eq!(v, Value::IntList(vec![1, -2]));
        let v: Value = serde_json::from_str("-4").unwrap();
        assert_eq!(v, Value::Int(-4));
        let v: Value = serde_json::from_str("\"ab\"").unwrap();
        assert_eq!(v, Value::Text("ab".into()));
        assert!(serde_json::from_str::<Value>("999").is_err());
        assert_eq!(serde_json::to_string(&Value::IntList(vec![3])).unwrap(), "[3]");
    }

    #[test]
    fn spec_type_consistency() {
        let ex1 = Example::new(
            [("x0".into(), Value::Int(1)), ("x1".into(), Value::IntList(vec![1]))],
            Value::IntList(vec![1]),
        );
        let ex2 = Example::new(
            [("x0".into(), Value::Int(5)), ("x1".into(), Value::Int(-4))],
            Value::Int(-4),
        );
        assert!(IoSpec::new(Domain::List, vec![ex1.clone()]).is_ok());
        assert!(IoSpec::new(Domain::List, vec![ex1, ex2]).is_err());
        assert!(IoSpec::new(Domain::String, vec![]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn value() -> impl Strategy<Value = Value> {
            prop_oneof![
                (INT_MIN..=INT_MAX).prop_map(Value::Int),
                prop::collection::vec(INT_MIN..=INT_MAX, 0..4).prop_map(Value::IntList),
                "[a-c]{0,3}".prop_map(Value::Text),
            ]
        }

        proptest! {
            #[test]
            fn equality_is_an_equivalence(a in value(), b in value(), c in value()) {
                prop_assert!(values_equal(&a, &a));
                prop_assert_eq!(values_equal(&a, &b), values_equal(&b, &a));
                if values_equal(&a, &b) && values_equal(&b, &c) {
                    prop_assert!(values_equal(&a, &c));
                }
            }
        }
    }
}
