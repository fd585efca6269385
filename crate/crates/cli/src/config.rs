//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use tiips_core::benchgen::GenCategory;
use tiips_core::engine::{Budget, SolverKind};
use tiips_core::Domain;

/// Every key is optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub domain: Option<String>,
    pub categories: Option<Vec<String>>,
    pub solver: Option<String>,
    pub inductive: Option<String>,
    pub transductive: Option<String>,
    pub inner_k: Option<usize>,
    pub outer_t: Option<usize>,
    pub step_limit: Option<usize>,
    pub beam: Option<usize>,
    pub wall_clock_cap: Option<f64>,
    pub timeout: Option<f64>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub train_count: Option<usize>,
    pub jobs: Option<usize>,
    pub tasks: Option<Vec<PathBuf>>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// How a model is provided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Builtin,
    Oracle,
    Heuristic,
    /// Spawn this command line and talk to it over the wire protocol.
    External(String),
}

impl Binding {
    pub fn parse(s: &str) -> Result<Binding, String> {
        if let Some(cmd) = s.strip_prefix("cmd:") {
            if cmd.trim().is_empty() {
                return Err("empty external command".into());
            }
            return Ok(Binding::External(cmd.trim().to_string()));
        }
        match s {
            "builtin" => Ok(Binding::Builtin),
            "oracle" => Ok(Binding::Oracle),
            "heuristic" => Ok(Binding::Heuristic),
            _ => Err(format!("unknown model binding `{s}` (builtin, oracle, heuristic or cmd:<command line>)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: Option<Domain>,
    pub categories: Vec<GenCategory>,
    pub solver: SolverKind,
    pub inductive: Binding,
    pub transductive: Binding,
    pub budget: Budget,
    pub timeout: f64,
    pub seed: u64,
    pub count: usize,
    pub train_count: Option<usize>,
    pub jobs: usize,
    pub tasks: Vec<PathBuf>,
    pub out: Option<PathBuf>,
}

/// `all` expands to the five generalization categories.
pub fn parse_categories(items: &[String]) -> Result<Vec<GenCategory>, String> {
    let mut out = Vec::new();
    for item in items.iter().flat_map(|s| s.split(',')) {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        if item == "all" {
            out.extend(GenCategory::GENERALIZATION);
        } else {
            out.push(item.parse()?);
        }
    }
    out.dedup();
    Ok(out)
}

impl RunConfig {
    /// Merge `file` under `flags`, then validate.
    pub fn resolve(file: FileConfig, flags: FileConfig) -> Result<RunConfig, String> {
        macro_rules! pick {
            ($f:ident) => {
                flags.$f.clone().or(file.$f.clone())
            };
        }
        let domain = pick!(domain).map(|d| d.parse::<Domain>()).transpose()?;
        let categories = parse_categories(&pick!(categories).unwrap_or_else(|| vec!["all".into()]))?;
        let solver = pick!(solver).unwrap_or_else(|| "tiips".into()).parse::<SolverKind>()?;
        let inductive = Binding::parse(&pick!(inductive).unwrap_or_else(|| "builtin".into()))?;
        let transductive = Binding::parse(&pick!(transductive).unwrap_or_else(|| "oracle".into()))?;
        if matches!(inductive, Binding::Oracle | Binding::Heuristic) {
            return Err("the inductive model must be builtin or an external command".into());
        }
        if transductive == Binding::Builtin {
            return Err("the transductive model must be oracle, heuristic or an external command".into());
        }
        let d = Budget::default();
        let budget = Budget {
            k: pick!(inner_k).unwrap_or(d.k),
            t: pick!(outer_t).unwrap_or(d.t),
            step_limit: pick!(step_limit).unwrap_or(d.step_limit),
            beam: pick!(beam).unwrap_or(d.beam),
            wall_clock_cap: pick!(wall_clock_cap),
        };
        budget.validate().map_err(|e| e.to_string())?;
        let timeout = pick!(timeout).unwrap_or(tiips_core::protocol::DEFAULT_TIMEOUT.as_secs_f64());
        if !(timeout > 0.0) {
            return Err("timeout must be positive".into());
        }
        let jobs = pick!(jobs).unwrap_or(1);
        if jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        Ok(RunConfig {
            domain,
            categories,
            solver,
            inductive,
            transductive,
            budget,
            timeout,
            seed: pick!(seed).unwrap_or(0),
            count: pick!(count).unwrap_or(1000),
            train_count: pick!(train_count),
            jobs,
            tasks: pick!(tasks).unwrap_or_default(),
            out: pick!(out),
        })
    }
}
