//! Task sampling for the compositional-generalization splits, training-triple
//! extraction and the line-delimited task file format.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ParseError, Result, SynthError};
use crate::list_dsl::{self, BinOp, IntFn, ListExpr, Pred, Statement, Ty, Var};
use crate::program::{self, Program, Subprogram};
use crate::string_dsl::{
    self, Boundary, Case, Inner, Modification, Regex, StringExpr, StringProgram, Substring,
    DELIMITERS, INDICES,
};
use crate::value::{Domain, Example, IoSpec, Value, STRING_INPUT};

pub const STRING_EXAMPLES: usize = 4;
pub const LIST_EXAMPLES: usize = 3;
pub const DEFAULT_MAX_ATTEMPTS: usize = 10_000;
/// Share of ComposeNewOperation training tasks that are single-op programs.
pub const SINGLE_OP_TRAIN_SHARE: f64 = 0.25;
const PLAN_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenCategory {
    TrainDistribution,
    LengthGeneralization,
    ComposeDifferentConcepts,
    SwitchConceptOrder,
    ComposeNewOperation,
    AddOperationFunctionality,
}

impl GenCategory {
    pub const ALL: [GenCategory; 6] = [
        GenCategory::TrainDistribution,
        GenCategory::LengthGeneralization,
        GenCategory::ComposeDifferentConcepts,
        GenCategory::SwitchConceptOrder,
        GenCategory::ComposeNewOperation,
        GenCategory::AddOperationFunctionality,
    ];

    /// The five generalization categories.
    pub const GENERALIZATION: [GenCategory; 5] = [
        GenCategory::LengthGeneralization,
        GenCategory::ComposeDifferentConcepts,
        GenCategory::SwitchConceptOrder,
        GenCategory::ComposeNewOperation,
        GenCategory::AddOperationFunctionality,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GenCategory::TrainDistribution => "train_distribution",
            GenCategory::LengthGeneralization => "length_generalization",
            GenCategory::ComposeDifferentConcepts => "compose_different_concepts",
            GenCategory::SwitchConceptOrder => "switch_concept_order",
            GenCategory::ComposeNewOperation => "compose_new_operation",
            GenCategory::AddOperationFunctionality => "add_operation_functionality",
        }
    }
}

impl fmt::Display for GenCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenCategory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        GenCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split `{s}`")),
        }
    }
}

/// One ground-truth step with its per-example outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtStep {
    pub subprogram: Subprogram,
    pub outputs: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTask", into = "RawTask")]
pub struct TaskRecord {
    pub id: String,
    pub domain: Domain,
    pub category: GenCategory,
    pub split: Split,
    pub spec: IoSpec,
    pub ground_truth: Program,
    pub gt_steps: Vec<GtStep>,
    pub seed: u64,
}

impl TaskRecord {
    /// Build a record from a program, deriving the step decomposition.
    pub fn from_program(
        id: impl Into<String>,
        category: GenCategory,
        split: Split,
        spec: IoSpec,
        ground_truth: Program,
        seed: u64,
    ) -> Result<TaskRecord> {
        let outputs = ground_truth.step_outputs(&spec)?;
        let gt_steps = ground_truth
            .steps()
            .into_iter()
            .zip(outputs)
            .map(|(subprogram, outputs)| GtStep { subprogram, outputs })
            .collect();
        let task = TaskRecord {
            id: id.into(),
            domain: spec.domain,
            category,
            split,
            spec,
            ground_truth,
            gt_steps,
            seed,
        };
        task.validate()?;
        Ok(task)
    }

    /// Ground truth solves the spec and the steps replay to it.
    pub fn validate(&self) -> Result<()> {
        if self.ground_truth.domain() != self.domain || self.spec.domain != self.domain {
            return Err(SynthError::TypeError("task mixes domains".into()));
        }
        if !self.ground_truth.verify(&self.spec) {
            return Err(SynthError::exec("ground truth does not solve the examples"));
        }
        let steps = self.ground_truth.steps();
        if steps.len() != self.gt_steps.len() {
            return Err(SynthError::TypeError("gt_steps do not match the ground truth".into()));
        }
        let replay = self.ground_truth.step_outputs(&self.spec)?;
        for (i, ((gt, s), out)) in self.gt_steps.iter().zip(&steps).zip(&replay).enumerate() {
            if gt.subprogram != *s || gt.outputs != *out {
                return Err(SynthError::exec(format!("gt step {i} does not replay")));
            }
        }
        Ok(())
    }

    /// States before each ground-truth step; one more than there are steps.
    pub fn state_chain(&self) -> Result<Vec<IoSpec>> {
        let mut chain = vec![self.spec.clone()];
        for step in &self.gt_steps {
            let next = program::update(chain.last().unwrap(), &step.outputs)?;
            chain.push(next);
        }
        Ok(chain)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    subprogram: String,
    outputs: Vec<Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    id: String,
    domain: Domain,
    category: GenCategory,
    split: Split,
    examples: Vec<Example>,
    ground_truth: String,
    gt_steps: Vec<RawStep>,
    seed: u64,
}

impl From<TaskRecord> for RawTask {
    fn from(t: TaskRecord) -> RawTask {
        RawTask {
            id: t.id,
            domain: t.domain,
            category: t.category,
            split: t.split,
            examples: t.spec.examples,
            ground_truth: t.ground_truth.to_string(),
            gt_steps: t
                .gt_steps
                .into_iter()
                .map(|s| RawStep {
                    subprogram: s.subprogram.to_string(),
                    outputs: s.outputs,
                })
                .collect(),
            seed: t.seed,
        }
    }
}

impl TryFrom<RawTask> for TaskRecord {
    type Error = SynthError;

    fn try_from(raw: RawTask) -> Result<TaskRecord> {
        let spec = IoSpec::new(raw.domain, raw.examples)?;
        let ground_truth = Program::parse(raw.domain, &raw.ground_truth)?;
        let num_inputs = spec.examples[0].inputs.len() as u32;
        let gt_steps = raw
            .gt_steps
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                let subprogram = match raw.domain {
                    Domain::String => Subprogram::Str(string_dsl::parse_string_expr(&s.subprogram)?),
                    Domain::List => {
                        let target = Var(num_inputs + i as u32);
                        let stmt = list_dsl::parse_statement(&s.subprogram, &|v| v < target)?;
                        if stmt.target != target {
                            return Err(SynthError::parse(0, &[target.name().as_str()], "step targets must be consecutive"));
                        }
                        Subprogram::List(stmt)
                    }
                };
                Ok(GtStep { subprogram, outputs: s.outputs })
            })
            .collect::<Result<_>>()?;
        let task = TaskRecord {
            id: raw.id,
            domain: raw.domain,
            category: raw.category,
            split: raw.split,
            spec,
            ground_truth,
            gt_steps,
            seed: raw.seed,
        };
        task.validate()?;
        Ok(task)
    }
}

/// (A) state before the step, (B) the step's outputs, (C) the step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingTriple {
    pub state: IoSpec,
    pub subgoal: Vec<Value>,
    pub subprogram: Subprogram,
}

pub fn extract_training_triples(task: &TaskRecord) -> Result<Vec<TrainingTriple>> {
    let chain = task.state_chain()?;
    Ok(task
        .gt_steps
        .iter()
        .zip(chain)
        .map(|(step, state)| TrainingTriple {
            state,
            subgoal: step.outputs.clone(),
            subprogram: step.subprogram.clone(),
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Category predicates

/// Inclusive program-length bounds for a (domain, category, split).
pub fn length_bounds(domain: Domain, category: GenCategory, split: Split) -> (usize, usize) {
    use GenCategory::*;
    match (domain, category, split) {
        (Domain::String, LengthGeneralization, Split::Test) => (7, 10),
        (Domain::String, TrainDistribution | LengthGeneralization | AddOperationFunctionality, _) => (1, 6),
        (Domain::String, ComposeNewOperation, Split::Train) => (1, 6),
        (Domain::String, _, _) => (2, 6),
        (Domain::List, LengthGeneralization, Split::Test) => (5, 5),
        (Domain::List, SwitchConceptOrder, _) => (2, 4),
        (Domain::List, ComposeDifferentConcepts | ComposeNewOperation, Split::Test) => (2, 4),
        (Domain::List, _, _) => (1, 4),
    }
}

/// String concept group: true for substring operations, false for the rest.
/// `None` for `Compose`, which belongs to neither group.
fn string_group(e: &StringExpr) -> Option<bool> {
    match e {
        StringExpr::Compose(..) => None,
        e => Some(e.is_substring()),
    }
}

/// True iff `seq` is a non-empty run of `first` followed by a non-empty run of `!first`.
fn two_runs(seq: &[bool], first: bool) -> bool {
    let s = seq.iter().take_while(|&&g| g == first).count();
    s > 0 && s < seq.len() && seq[s..].iter().all(|&g| g != first)
}

fn string_predicate(category: GenCategory, split: Split, p: &StringProgram) -> bool {
    use GenCategory::*;
    let (lo, hi) = length_bounds(Domain::String, category, split);
    let len = p.exprs.len();
    if len < lo || len > hi {
        return false;
    }
    let any_compose = p.exprs.iter().any(StringExpr::is_compose);
    let groups: Option<Vec<bool>> = p.exprs.iter().map(string_group).collect();
    match (category, split) {
        (TrainDistribution | LengthGeneralization, _) => true,
        (ComposeDifferentConcepts, split) => match groups {
            None => false,
            Some(g) => {
                let mixed = g.iter().any(|&x| x) && g.iter().any(|&x| !x);
                mixed == (split == Split::Test)
            }
        },
        (SwitchConceptOrder, split) => match groups {
            None => false,
            Some(g) => two_runs(&g, split == Split::Train),
        },
        (ComposeNewOperation, Split::Train) => {
            if len == 1 {
                any_compose
            } else {
                !any_compose
            }
        }
        (ComposeNewOperation, Split::Test) => any_compose,
        (AddOperationFunctionality, split) => {
            let nested = p.exprs.iter().any(StringExpr::nests_substring);
            nested == (split == Split::Test)
        }
    }
}

fn is_scanl1(e: &ListExpr) -> bool {
    matches!(e, ListExpr::Scanl1(..))
}

fn scanl1_added(e: &ListExpr) -> bool {
    matches!(e, ListExpr::Scanl1(BinOp::Add | BinOp::Mul | BinOp::Max, _))
}

fn list_predicate(category: GenCategory, split: Split, stmts: &[Statement]) -> bool {
    use GenCategory::*;
    let (lo, hi) = length_bounds(Domain::List, category, split);
    let len = stmts.len();
    if len < lo || len > hi {
        return false;
    }
    let groups: Vec<bool> = stmts.iter().map(|s| s.expr.is_first_order_or_map()).collect();
    let uses_scanl1 = stmts.iter().any(|s| is_scanl1(&s.expr));
    match (category, split) {
        (TrainDistribution | LengthGeneralization, _) => true,
        (ComposeDifferentConcepts, split) => {
            let mixed = groups.iter().any(|&x| x) && groups.iter().any(|&x| !x);
            mixed == (split == Split::Test)
        }
        (SwitchConceptOrder, split) => two_runs(&groups, split == Split::Train),
        (ComposeNewOperation, Split::Train) => {
            if len == 1 {
                uses_scanl1
            } else {
                !uses_scanl1
            }
        }
        (ComposeNewOperation, Split::Test) => uses_scanl1,
        (AddOperationFunctionality, Split::Train) => !stmts.iter().any(|s| scanl1_added(&s.expr)),
        (AddOperationFunctionality, Split::Test) => stmts.iter().any(|s| scanl1_added(&s.expr)),
    }
}

/// Whether `program` belongs to the split of `category` in `domain`.
pub fn category_predicate(domain: Domain, category: GenCategory, split: Split, program: &Program) -> bool {
    match (domain, program) {
        (Domain::String, Program::Str(p)) => string_predicate(category, split, p),
        (Domain::List, Program::List(p)) => list_predicate(category, split, &p.statements),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Sampling

/// Mix a base seed with a stream index so neighbouring tasks get unrelated streams.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn label_hash(s: &str) -> u64 {
    // FNV-1a; stable across platforms and releases
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Seed of the `index`-th task of a split in a generated dataset.
pub fn task_seed(base: u64, domain: Domain, category: GenCategory, split: Split, index: u64) -> u64 {
    let label = format!("{domain}/{category}/{split}");
    derive_seed(derive_seed(base, label_hash(&label)), index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    /// Whole-program resamples before giving up.
    pub max_attempts: usize,
    /// Retries for a single step within one attempt.
    pub step_retries: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            step_retries: 200,
        }
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sample_task(domain: Domain, category: GenCategory, split: Split, rng_seed: u64) -> Result<TaskRecord> {
    sample_task_with(domain, category, split, rng_seed, &SampleConfig::default())
}

pub fn sample_task_with(
    domain: Domain,
    category: GenCategory,
    split: Split,
    rng_seed: u64,
    cfg: &SampleConfig,
) -> Result<TaskRecord> {
    let mut rng = rng_for(rng_seed);
    let id = format!("{domain}-{category}-{split}-{rng_seed:016x}");
    // the plan (length and step kinds) is kept across retries so that long
    // plans are not crowded out by the higher rejection rate they suffer
    let mut str_plan = Vec::new();
    let mut list_plan_ = Vec::new();
    for attempt in 0..cfg.max_attempts {
        if attempt % PLAN_RETRIES == 0 {
            match domain {
                Domain::String => str_plan = string_plan(&mut rng, category, split),
                Domain::List => list_plan_ = list_plan(&mut rng, category, split),
            }
        }
        let sampled = match domain {
            Domain::String => sample_string_attempt(&mut rng, &str_plan, cfg),
            Domain::List => sample_list_attempt(&mut rng, &list_plan_, cfg),
        };
        let Some((spec, program)) = sampled else { continue };
        if !category_predicate(domain, category, split, &program) {
            continue;
        }
        return TaskRecord::from_program(id, category, split, spec, program, rng_seed);
    }
    Err(SynthError::BudgetExhausted(format!(
        "no valid {domain} {category} {split} task after {} attempts",
        cfg.max_attempts
    )))
}

/// Sample examples on which `program` runs and is non-degenerate.
pub fn sample_inputs(domain: Domain, program: &Program, rng_seed: u64) -> Result<Vec<Example>> {
    let mut rng = rng_for(rng_seed);
    for _ in 0..DEFAULT_MAX_ATTEMPTS {
        let inputs = match (domain, program) {
            (Domain::String, Program::Str(_)) => string_inputs(&mut rng, STRING_EXAMPLES),
            (Domain::List, Program::List(p)) => match list_inputs_for(&mut rng, p) {
                Some(v) => v,
                None => return Err(SynthError::TypeError("program inputs cannot be typed".into())),
            },
            _ => return Err(SynthError::TypeError("program and domain differ".into())),
        };
        let placeholder: Vec<Example> = inputs
            .into_iter()
            .map(|inputs| Example { inputs, output: placeholder_output(domain) })
            .collect();
        let Ok(spec) = IoSpec::new(domain, placeholder) else { continue };
        let Ok(outs) = program.run(&spec) else { continue };
        let Ok(spec) = spec.with_targets(outs) else { continue };
        if non_degenerate(program, &spec) {
            return Ok(spec.examples);
        }
    }
    Err(SynthError::BudgetExhausted("no non-degenerate inputs found".into()))
}

fn placeholder_output(domain: Domain) -> Value {
    match domain {
        Domain::String => Value::Text(String::new()),
        Domain::List => Value::Int(0),
    }
}

/// Degeneracy filters shared by task sampling and input sampling.
fn non_degenerate(program: &Program, spec: &IoSpec) -> bool {
    let outs: Vec<&Value> = spec.targets().collect();
    if outs.iter().all(|o| *o == outs[0]) {
        return false;
    }
    let Ok(steps) = program.step_outputs(spec) else { return false };
    match program {
        Program::Str(_) => steps
            .iter()
            .all(|s| s.iter().all(|v| v.as_text().is_some_and(|t| !t.is_empty()))),
        Program::List(p) => {
            let finals = steps.last().unwrap();
            let mut state = spec.clone();
            for (i, out) in steps.iter().enumerate() {
                if i + 1 < steps.len() && out == finals {
                    return false;
                }
                if binds_existing(&state, out) {
                    return false;
                }
                state = program::update(&state, out).expect("replayed step");
            }
            !has_dead_code(p)
        }
    }
}

fn binds_existing(state: &IoSpec, out: &[Value]) -> bool {
    let names = state.var_names();
    names
        .iter()
        .any(|name| state.examples.iter().zip(out).all(|(ex, v)| ex.inputs[*name] == *v))
}

fn has_dead_code(p: &list_dsl::ListProgram) -> bool {
    let n = p.statements.len();
    p.statements[..n - 1].iter().any(|s| {
        !p.statements
            .iter()
            .any(|later| later.expr.operands().iter().any(|(v, _)| *v == s.target))
    })
}

// -- string sampling

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StrKind {
    Any,
    AnyNoCompose,
    /// Anything except a substring nested in `Compose`.
    AnyFlat,
    Sub,
    NonSub,
    Compose,
    ComposeSub,
}

fn string_plan(rng: &mut ChaCha8Rng, category: GenCategory, split: Split) -> Vec<StrKind> {
    use GenCategory::*;
    use StrKind::*;
    let (lo, hi) = length_bounds(Domain::String, category, split);
    match (category, split) {
        (ComposeNewOperation, Split::Train) => {
            if rng.gen_bool(SINGLE_OP_TRAIN_SHARE) {
                vec![Compose]
            } else {
                vec![AnyNoCompose; rng.gen_range(2..=hi)]
            }
        }
        _ => {
            let len = rng.gen_range(lo..=hi);
            match (category, split) {
                (TrainDistribution | LengthGeneralization, _) => vec![Any; len],
                (ComposeDifferentConcepts, Split::Train) => {
                    vec![if rng.gen_bool(0.5) { Sub } else { NonSub }; len]
                }
                (ComposeDifferentConcepts, Split::Test) => {
                    let mut plan: Vec<StrKind> =
                        (0..len).map(|_| if rng.gen_bool(0.5) { Sub } else { NonSub }).collect();
                    let a = rng.gen_range(0..len);
                    let b = (a + rng.gen_range(1..len)) % len;
                    plan[a] = Sub;
                    plan[b] = NonSub;
                    plan
                }
                (SwitchConceptOrder, split) => {
                    let s = rng.gen_range(1..len);
                    let (first, second) = if split == Split::Train { (Sub, NonSub) } else { (NonSub, Sub) };
                    (0..len).map(|i| if i < s { first } else { second }).collect()
                }
                (ComposeNewOperation, _) => {
                    let mut plan = vec![Any; len];
                    plan[rng.gen_range(0..len)] = Compose;
                    plan
                }
                (AddOperationFunctionality, Split::Train) => vec![AnyFlat; len],
                (AddOperationFunctionality, Split::Test) => {
                    let mut plan = vec![Any; len];
                    plan[rng.gen_range(0..len)] = ComposeSub;
                    plan
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum TokKind {
    Number,
    Lower,
    Upper,
    Proper,
}

/// Token types and separators shared by all examples of one task.
struct Skeleton {
    lead: Option<char>,
    tokens: Vec<TokKind>,
    seps: Vec<char>,
    trail: Option<char>,
}

fn sample_skeleton(rng: &mut ChaCha8Rng) -> Skeleton {
    let n = rng.gen_range(1..=3);
    let kinds = [TokKind::Number, TokKind::Lower, TokKind::Upper, TokKind::Proper];
    let tokens = (0..n).map(|_| *kinds.choose(rng).unwrap()).collect();
    let seps = (1..n).map(|_| sample_delim(rng)).collect();
    let lead = rng.gen_bool(0.15).then(|| sample_delim(rng));
    let trail = rng.gen_bool(0.2).then(|| sample_delim(rng));
    Skeleton { lead, tokens, seps, trail }
}

fn sample_delim(rng: &mut ChaCha8Rng) -> char {
    // spaces and common punctuation dominate real inputs
    if rng.gen_bool(0.4) {
        *[' ', ',', '.'].choose(rng).unwrap()
    } else {
        *DELIMITERS.choose(rng).unwrap()
    }
}

fn sample_token(rng: &mut ChaCha8Rng, kind: TokKind) -> String {
    let letters = |rng: &mut ChaCha8Rng, n: usize, base: u8| -> String {
        (0..n).map(|_| (base + rng.gen_range(0..26)) as char).collect()
    };
    match kind {
        TokKind::Number => {
            let n = rng.gen_range(1..=3);
            (0..n).map(|_| (b'0' + rng.gen_range(0..10)) as char).collect()
        }
        TokKind::Lower => {
            let n = rng.gen_range(2..=7);
            letters(rng, n, b'a')
        }
        TokKind::Upper => {
            let n = rng.gen_range(2..=6);
            letters(rng, n, b'A')
        }
        TokKind::Proper => {
            let n = rng.gen_range(2..=7);
            let mut s = letters(rng, 1, b'A');
            s.push_str(&letters(rng, n - 1, b'a'));
            s
        }
    }
}

fn instantiate(rng: &mut ChaCha8Rng, sk: &Skeleton) -> String {
    let mut s = String::new();
    s.extend(sk.lead);
    for (i, &k) in sk.tokens.iter().enumerate() {
        if i > 0 {
            s.push(sk.seps[i - 1]);
        }
        s.push_str(&sample_token(rng, k));
    }
    s.extend(sk.trail);
    s
}

fn string_inputs(rng: &mut ChaCha8Rng, n: usize) -> Vec<indexmap::IndexMap<String, Value>> {
    let sk = sample_skeleton(rng);
    (0..n)
        .map(|_| {
            let text = instantiate(rng, &sk);
            [(STRING_INPUT.to_string(), Value::Text(text))].into_iter().collect()
        })
        .collect()
}

fn sample_index(rng: &mut ChaCha8Rng) -> i8 {
    const WEIGHTED: [i8; 14] = [1, 1, 1, 2, 2, 3, 4, 5, -1, -1, -2, -3, -4, -5];
    debug_assert!(WEIGHTED.iter().all(|i| INDICES.contains(i)));
    *WEIGHTED.choose(rng).unwrap()
}

fn sample_regex(rng: &mut ChaCha8Rng) -> Regex {
    if rng.gen_bool(0.65) {
        *Regex::CLASSES.choose(rng).unwrap()
    } else {
        Regex::Delim(sample_delim(rng))
    }
}

fn sample_position(rng: &mut ChaCha8Rng) -> i8 {
    let k: i8 = rng.gen_range(1..=12);
    if rng.gen_bool(0.3) {
        -k
    } else {
        k
    }
}

fn sample_substring(rng: &mut ChaCha8Rng) -> Substring {
    let boundary = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Boundary::Start } else { Boundary::End };
    match rng.gen_range(0..5) {
        0 => {
            let (a, b) = (sample_position(rng), sample_position(rng));
            Substring::SubStr(a, b)
        }
        1 => Substring::GetSpan(
            sample_regex(rng),
            sample_index(rng),
            boundary(rng),
            sample_regex(rng),
            sample_index(rng),
            boundary(rng),
        ),
        2 => Substring::GetUpto(sample_regex(rng), sample_index(rng)),
        3 => Substring::GetFrom(sample_regex(rng), sample_index(rng)),
        _ => Substring::GetToken(sample_regex(rng), sample_index(rng)),
    }
}

fn sample_char(rng: &mut ChaCha8Rng) -> char {
    let chars = string_dsl::all_characters();
    if rng.gen_bool(0.5) {
        sample_delim(rng)
    } else {
        *chars.choose(rng).unwrap()
    }
}

fn sample_modification(rng: &mut ChaCha8Rng) -> Modification {
    match rng.gen_range(0..9) {
        0 => Modification::ToCase(*Case::ALL.choose(rng).unwrap()),
        1 => Modification::Replace(sample_delim(rng), sample_char(rng)),
        2 => Modification::Trim,
        3 => Modification::GetFirst(sample_regex(rng), sample_index(rng)),
        4 => Modification::GetAll(sample_regex(rng)),
        5 => Modification::Substitute(sample_regex(rng), sample_index(rng), sample_char(rng)),
        6 => Modification::SubstituteAll(sample_regex(rng), sample_char(rng)),
        7 => Modification::Remove(sample_regex(rng), sample_index(rng)),
        _ => Modification::RemoveAll(sample_regex(rng)),
    }
}

fn sample_expr(rng: &mut ChaCha8Rng, kind: StrKind) -> StringExpr {
    let non_sub = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.3) {
            StringExpr::Const(sample_char(rng))
        } else {
            StringExpr::Mod(sample_modification(rng))
        }
    };
    let compose = |rng: &mut ChaCha8Rng, sub_inner: bool| {
        let inner = if sub_inner {
            Inner::Sub(sample_substring(rng))
        } else {
            Inner::Mod(sample_modification(rng))
        };
        StringExpr::Compose(sample_modification(rng), inner)
    };
    match kind {
        StrKind::Sub => StringExpr::Sub(sample_substring(rng)),
        StrKind::NonSub => non_sub(rng),
        StrKind::Compose => {
            let sub_inner = rng.gen_bool(0.6);
            compose(rng, sub_inner)
        }
        StrKind::ComposeSub => compose(rng, true),
        StrKind::Any | StrKind::AnyNoCompose | StrKind::AnyFlat => {
            let roll = rng.gen_range(0..100);
            match roll {
                0..=44 => StringExpr::Sub(sample_substring(rng)),
                45..=79 => non_sub(rng),
                _ => match kind {
                    StrKind::AnyNoCompose => StringExpr::Sub(sample_substring(rng)),
                    StrKind::AnyFlat => compose(rng, false),
                    _ => {
                        let sub_inner = rng.gen_bool(0.6);
                        compose(rng, sub_inner)
                    }
                },
            }
        }
    }
}

fn sample_string_attempt(rng: &mut ChaCha8Rng, plan: &[StrKind], cfg: &SampleConfig) -> Option<(IoSpec, Program)> {
    let inputs: Vec<String> = string_inputs(rng, STRING_EXAMPLES)
        .into_iter()
        .map(|m| m[STRING_INPUT].as_text().unwrap().to_string())
        .collect();
    let mut outputs = vec![String::new(); inputs.len()];
    let mut exprs = Vec::with_capacity(plan.len());
    for &kind in plan {
        let mut found = None;
        for _ in 0..cfg.step_retries {
            let e = sample_expr(rng, kind);
            let outs: Option<Vec<String>> = inputs
                .iter()
                .map(|s| string_dsl::eval_string_expr(&e, s).ok().filter(|o| !o.is_empty()))
                .collect();
            let Some(outs) = outs else { continue };
            let fits = outputs
                .iter()
                .zip(&outs)
                .all(|(acc, o)| (acc.chars().count() + o.chars().count()) <= crate::value::MAX_TEXT_LEN);
            if fits {
                found = Some((e, outs));
                break;
            }
        }
        let (e, outs) = found?;
        for (acc, o) in outputs.iter_mut().zip(outs) {
            acc.push_str(&o);
        }
        exprs.push(e);
    }
    let examples = inputs
        .iter()
        .zip(&outputs)
        .map(|(i, o)| Example::text(i, o))
        .collect::<Result<Vec<_>>>()
        .ok()?;
    let spec = IoSpec::new(Domain::String, examples).ok()?;
    let program = Program::Str(StringProgram { exprs });
    non_degenerate(&program, &spec).then_some((spec, program))
}

// -- list sampling

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ListKind {
    Any,
    GroupA,
    GroupB,
    Scanl1Only,
    NoScanl1,
    /// `Scanl1` restricted to the training lambdas `(-)` and `(min)`.
    RestrictedScanl1,
    Scanl1Added,
}

fn list_plan(rng: &mut ChaCha8Rng, category: GenCategory, split: Split) -> Vec<ListKind> {
    use GenCategory::*;
    use ListKind::*;
    let (lo, hi) = length_bounds(Domain::List, category, split);
    if (category, split) == (ComposeNewOperation, Split::Train) {
        return if rng.gen_bool(SINGLE_OP_TRAIN_SHARE) {
            vec![Scanl1Only]
        } else {
            vec![NoScanl1; rng.gen_range(2..=hi)]
        };
    }
    let len = rng.gen_range(lo..=hi);
    match (category, split) {
        (TrainDistribution | LengthGeneralization, _) => vec![Any; len],
        (ComposeDifferentConcepts, Split::Train) => vec![if rng.gen_bool(0.5) { GroupA } else { GroupB }; len],
        (ComposeDifferentConcepts, Split::Test) => {
            let mut plan: Vec<ListKind> = (0..len).map(|_| if rng.gen_bool(0.5) { GroupA } else { GroupB }).collect();
            let a = rng.gen_range(0..len);
            let b = (a + rng.gen_range(1..len)) % len;
            plan[a] = GroupA;
            plan[b] = GroupB;
            plan
        }
        (SwitchConceptOrder, split) => {
            let s = rng.gen_range(1..len);
            let (first, second) = if split == Split::Train { (GroupA, GroupB) } else { (GroupB, GroupA) };
            (0..len).map(|i| if i < s { first } else { second }).collect()
        }
        (ComposeNewOperation, _) => {
            let mut plan = vec![Any; len];
            plan[rng.gen_range(0..len)] = Scanl1Only;
            plan
        }
        (AddOperationFunctionality, Split::Train) => vec![RestrictedScanl1; len],
        (AddOperationFunctionality, Split::Test) => {
            let mut plan = vec![RestrictedScanl1; len];
            plan[rng.gen_range(0..len)] = Scanl1Added;
            plan
        }
    }
}

fn random_list(rng: &mut ChaCha8Rng) -> Value {
    let n = rng.gen_range(3..=8);
    Value::IntList((0..n).map(|_| rng.gen_range(-30..=30)).collect())
}

fn random_int(rng: &mut ChaCha8Rng) -> Value {
    Value::Int(rng.gen_range(-2..=8))
}

fn input_types(rng: &mut ChaCha8Rng) -> Vec<Ty> {
    if rng.gen_bool(0.3) {
        if rng.gen_bool(0.5) {
            vec![Ty::Int, Ty::List]
        } else {
            vec![Ty::List, Ty::List]
        }
    } else {
        vec![Ty::List]
    }
}

fn list_inputs(rng: &mut ChaCha8Rng, types: &[Ty], n: usize) -> Vec<indexmap::IndexMap<String, Value>> {
    (0..n)
        .map(|_| {
            types
                .iter()
                .enumerate()
                .map(|(i, ty)| {
                    let v = match ty {
                        Ty::Int => random_int(rng),
                        Ty::List => random_list(rng),
                    };
                    (Var(i as u32).name(), v)
                })
                .collect()
        })
        .collect()
}

/// Input types a list program needs, from how its inputs are used.
fn list_inputs_for(rng: &mut ChaCha8Rng, p: &list_dsl::ListProgram) -> Option<Vec<indexmap::IndexMap<String, Value>>> {
    let mut types = vec![None; p.num_inputs as usize];
    for s in &p.statements {
        for (v, ty) in s.expr.operands() {
            if (v.0 as usize) < types.len() {
                match types[v.0 as usize] {
                    None => types[v.0 as usize] = Some(ty),
                    Some(t) if t != ty => return None,
                    _ => {}
                }
            }
        }
    }
    let types: Vec<Ty> = types.into_iter().map(|t| t.unwrap_or(Ty::List)).collect();
    Some(list_inputs(rng, &types, LIST_EXAMPLES))
}

fn pick_var(rng: &mut ChaCha8Rng, vars: &[(Var, Ty)], ty: Ty, unused: &[Var]) -> Option<Var> {
    let typed: Vec<Var> = vars.iter().filter(|(_, t)| *t == ty).map(|(v, _)| *v).collect();
    let fresh: Vec<Var> = typed.iter().copied().filter(|v| unused.contains(v)).collect();
    if !fresh.is_empty() && rng.gen_bool(0.8) {
        fresh.choose(rng).copied()
    } else {
        typed.choose(rng).copied()
    }
}

const GROUP_A_OPS: [&str; 11] = [
    "Head", "Last", "Access", "Minimum", "Maximum", "Sum", "Take", "Drop", "Reverse", "Sort", "Map",
];
const GROUP_B_OPS: [&str; 4] = ["Filter", "Count", "Zip", "Scanl1"];

fn sample_list_expr(rng: &mut ChaCha8Rng, kind: ListKind, vars: &[(Var, Ty)], unused: &[Var]) -> Option<ListExpr> {
    let op = match kind {
        ListKind::GroupA => *GROUP_A_OPS.choose(rng).unwrap(),
        ListKind::GroupB => *GROUP_B_OPS.choose(rng).unwrap(),
        ListKind::Scanl1Only | ListKind::Scanl1Added => "Scanl1",
        ListKind::NoScanl1 => {
            let all: Vec<&str> = GROUP_A_OPS.iter().chain(&GROUP_B_OPS[..3]).copied().collect();
            *all.choose(rng).unwrap()
        }
        ListKind::Any | ListKind::RestrictedScanl1 => {
            if rng.gen_bool(0.5) {
                *GROUP_A_OPS.choose(rng).unwrap()
            } else {
                *GROUP_B_OPS.choose(rng).unwrap()
            }
        }
    };
    let l = |rng: &mut ChaCha8Rng| pick_var(rng, vars, Ty::List, unused);
    let n = |rng: &mut ChaCha8Rng| pick_var(rng, vars, Ty::Int, unused);
    let binop = *BinOp::ALL.choose(rng).unwrap();
    Some(match op {
        "Head" => ListExpr::Head(l(rng)?),
        "Last" => ListExpr::Last(l(rng)?),
        "Access" => ListExpr::Access(n(rng)?, l(rng)?),
        "Minimum" => ListExpr::Minimum(l(rng)?),
        "Maximum" => ListExpr::Maximum(l(rng)?),
        "Sum" => ListExpr::Sum(l(rng)?),
        "Take" => ListExpr::Take(n(rng)?, l(rng)?),
        "Drop" => ListExpr::Drop(n(rng)?, l(rng)?),
        "Reverse" => ListExpr::Reverse(l(rng)?),
        "Sort" => ListExpr::Sort(l(rng)?),
        "Map" => ListExpr::Map(*IntFn::ALL.choose(rng).unwrap(), l(rng)?),
        "Filter" => ListExpr::Filter(*Pred::ALL.choose(rng).unwrap(), l(rng)?),
        "Count" => ListExpr::Count(*Pred::ALL.choose(rng).unwrap(), l(rng)?),
        "Zip" => ListExpr::Zip(binop, l(rng)?, l(rng)?),
        _ => {
            let op = match kind {
                ListKind::RestrictedScanl1 => *[BinOp::Sub, BinOp::Min].choose(rng).unwrap(),
                ListKind::Scanl1Added => *[BinOp::Add, BinOp::Mul, BinOp::Max].choose(rng).unwrap(),
                _ => binop,
            };
            ListExpr::Scanl1(op, l(rng)?)
        }
    })
}

fn sample_list_attempt(rng: &mut ChaCha8Rng, plan: &[ListKind], cfg: &SampleConfig) -> Option<(IoSpec, Program)> {
    let types = input_types(rng);
    let inputs = list_inputs(rng, &types, LIST_EXAMPLES);
    let examples = inputs
        .into_iter()
        .map(|inputs| Example { inputs, output: Value::Int(0) })
        .collect();
    let original = IoSpec::new(Domain::List, examples).ok()?;
    let mut state = original.clone();
    let mut unused: Vec<Var> = Vec::new();
    let mut statements = Vec::with_capacity(plan.len());
    let mut last = Vec::new();
    for &kind in plan {
        let vars = list_dsl::bound_vars(&state);
        let target = list_dsl::next_var(&state);
        let mut found = None;
        for _ in 0..cfg.step_retries {
            let Some(expr) = sample_list_expr(rng, kind, &vars, &unused) else { continue };
            let Ok(outs) = list_dsl::execute_on(&expr, &state) else { continue };
            if binds_existing(&state, &outs) {
                continue;
            }
            found = Some((expr, outs));
            break;
        }
        let (expr, outs) = found?;
        unused.retain(|v| !expr.operands().iter().any(|(o, _)| o == v));
        unused.push(target);
        state = program::update(&state, &outs).ok()?;
        statements.push(Statement { target, expr });
        last = outs;
    }
    let spec = original.with_targets(last).ok()?;
    let program = Program::List(list_dsl::ListProgram {
        num_inputs: types.len() as u32,
        statements,
    });
    non_degenerate(&program, &spec).then_some((spec, program))
}

/// `count` tasks of one split, seeded from `base_seed`.
pub fn generate_split(
    domain: Domain,
    category: GenCategory,
    split: Split,
    count: usize,
    base_seed: u64,
    cfg: &SampleConfig,
) -> Result<Vec<TaskRecord>> {
    (0..count as u64)
        .map(|i| {
            let seed = task_seed(base_seed, domain, category, split, i);
            let mut t = sample_task_with(domain, category, split, seed, cfg)?;
            t.id = format!("{domain}-{category}-{split}-{i:05}");
            Ok(t)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Task files

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Parse(#[from] ParseError),
}

/// One JSON record per line.
pub fn write_dataset(tasks: &[TaskRecord], path: &Path) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for t in tasks {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Parse one task line; errors carry the 1-based line number.
pub fn parse_task_line(line: &str, lineno: usize) -> std::result::Result<TaskRecord, ParseError> {
    serde_json::from_str(line).map_err(|e| {
        ParseError::new(lineno, &["task record"], format!("line {lineno}: {e}"))
    })
}

pub fn read_dataset(path: &Path) -> std::result::Result<Vec<TaskRecord>, DatasetError> {
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut tasks = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        tasks.push(parse_task_line(&line, i + 1)?);
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicate_examples() {
        let compose_and_more = Program::parse(
            Domain::String,
            "Compose(ToCase(ALL_CAPS), GetToken(WORD, 1)) | Const('.')",
        )
        .unwrap();
        assert!(!category_predicate(
            Domain::String,
            GenCategory::ComposeNewOperation,
            Split::Train,
            &compose_and_more
        ));
        let scan_add = Program::parse(Domain::List, "x0 = INPUT | x1 = Scanl1 (+) x0").unwrap();
        assert!(!category_predicate(
            Domain::List,
            GenCategory::AddOperationFunctionality,
            Split::Train,
            &scan_add
        ));
        assert!(category_predicate(
            Domain::List,
            GenCategory::AddOperationFunctionality,
            Split::Test,
            &scan_add
        ));
        let one = Program::parse(Domain::String, "Const('.')").unwrap();
        assert!(category_predicate(
            Domain::String,
            GenCategory::LengthGeneralization,
            Split::Train,
            &one
        ));
    }

    #[test]
    fn sampling_is_deterministic() {
        for domain in [Domain::String, Domain::List] {
            let a = sample_task(domain, GenCategory::TrainDistribution, Split::Train, 7).unwrap();
            let b = sample_task(domain, GenCategory::TrainDistribution, Split::Train, 7).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn example_counts() {
        let s = sample_task(Domain::String, GenCategory::TrainDistribution, Split::Test, 1).unwrap();
        assert_eq!(s.spec.len(), STRING_EXAMPLES);
        let l = sample_task(Domain::List, GenCategory::TrainDistribution, Split::Test, 1).unwrap();
        assert_eq!(l.spec.len(), LIST_EXAMPLES);
    }

    #[test]
    fn constant_program_is_degenerate() {
        let p = Program::parse(Domain::String, "Const('.')").unwrap();
        assert!(sample_inputs(Domain::String, &p, 3).is_err());
        let p = Program::parse(Domain::String, "GetToken(WORD, 1)").unwrap();
        assert_eq!(sample_inputs(Domain::String, &p, 3).unwrap().len(), STRING_EXAMPLES);
    }

    #[test]
    fn unknown_field_names_the_field() {
        let t = sample_task(Domain::List, GenCategory::TrainDistribution, Split::Train, 2).unwrap();
        let mut v = serde_json::to_value(&t).unwrap();
        v.as_object_mut().unwrap().insert("bogus".into(), serde_json::json!(1));
        let e = parse_task_line(&v.to_string(), 4).unwrap_err();
        assert!(e.message.contains("bogus") && e.message.contains("line 4"), "{}", e.message);
    }
}
