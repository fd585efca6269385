//! Program synthesis over a string-manipulation DSL and an integer-list DSL,
//! with inductive proposal, transductive subgoal guidance and their interleaving.

pub mod benchgen;
pub mod engine;
pub mod error;
pub mod inductive;
pub mod list_dsl;
pub mod metrics;
pub mod program;
pub mod protocol;
pub mod string_dsl;
pub mod transductive;
pub mod value;

pub use error::{ErrorKind, ParseError, Result, SynthError};
pub use value::{Domain, Example, IoSpec, Value};
