//! Inductive models: propose ranked single-step subprograms for a specification.
//!
//! The built-in model enumerates the whole single-step space of the domain,
//! prunes by observational equivalence and ranks exact solvers first.

use std::collections::{HashMap, HashSet};

use crate::benchgen::TaskRecord;
use crate::error::{Result, SynthError};
use crate::list_dsl::{self, BinOp, IntFn, ListExpr, Pred, Statement, Ty, Var};
use crate::program::Subprogram;
use crate::string_dsl::{
    all_characters, apply_modification, is_grammar_char, substring_span, Boundary, Case, Inner,
    MatchTable, Modification, Regex, StringExpr, Substring, INDICES, POSITION_RANGE,
    resolve_index,
};
use crate::value::{Domain, IoSpec, Value};

pub const DEFAULT_NODE_CAP: usize = 5_000_000;

/// A proposed step; higher scores rank first.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub subprogram: Subprogram,
    pub score: f64,
}

pub trait InductiveModel {
    /// Called once before solving `task`; models that need no task context ignore it.
    fn begin_task(&mut self, _task: &TaskRecord) {}

    /// At most `beam` candidates, best first.
    fn propose(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<Candidate>>;
}

/// The built-in enumerative model.
#[derive(Debug, Clone)]
pub struct Enumerator {
    pub node_cap: usize,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator { node_cap: DEFAULT_NODE_CAP }
    }
}

impl InductiveModel for Enumerator {
    fn propose(&mut self, spec: &IoSpec, beam: usize) -> Result<Vec<Candidate>> {
        enumerate_step_with(spec, beam, self.node_cap)
    }
}

pub fn enumerate_step(spec: &IoSpec, beam: usize) -> Result<Vec<Candidate>> {
    enumerate_step_with(spec, beam, DEFAULT_NODE_CAP)
}

pub fn enumerate_step_with(spec: &IoSpec, beam: usize, node_cap: usize) -> Result<Vec<Candidate>> {
    let mut ranked = ranked_pool(spec, node_cap)?;
    ranked.truncate(beam);
    Ok(ranked
        .into_iter()
        .map(|r| Candidate {
            score: -((r.tier as f64) * 1e4 + r.size as f64),
            subprogram: r.subprogram,
        })
        .collect())
}

/// One observational-equivalence class kept by the enumerator.
#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub subprogram: Subprogram,
    pub outputs: Vec<Value>,
    /// 0 exact solver, 1 other non-constant, 2 string constant.
    pub tier: u8,
    pub size: usize,
}

/// Every kept class in rank order (exact solvers first, then size, then text).
pub fn ranked_pool(spec: &IoSpec, node_cap: usize) -> Result<Vec<PoolEntry>> {
    let mut pool = match spec.domain {
        Domain::String => string_pool(spec, node_cap)?,
        Domain::List => list_pool(spec, node_cap)?,
    };
    pool.sort_by_cached_key(|e| (e.tier, e.size, e.subprogram.to_string()));
    Ok(pool)
}

// ---------------------------------------------------------------------------
// String domain

type Sig = Vec<Vec<char>>;

struct Budget {
    used: usize,
    cap: usize,
}

impl Budget {
    fn spend(&mut self, n: usize) -> Result<()> {
        self.used += n;
        if self.used > self.cap {
            Err(SynthError::BudgetExhausted(format!("enumeration exceeded {} nodes", self.cap)))
        } else {
            Ok(())
        }
    }
}

fn is_prefix(out: &[char], target: &[char]) -> bool {
    out.len() <= target.len() && target[..out.len()] == *out
}

/// Keep `(size, expr)` if it beats the current representative of its class.
fn keep_better<E: Clone + ToString>(slot: &mut (usize, E), size: usize, expr: &E) {
    if size < slot.0 || (size == slot.0 && expr.to_string() < slot.1.to_string()) {
        *slot = (size, expr.clone());
    }
}

struct StrCtx {
    inputs: Vec<Vec<char>>,
    tables: Vec<MatchTable>,
    targets: Vec<Vec<char>>,
}

impl StrCtx {
    fn consistent(&self, sig: &[Vec<char>]) -> bool {
        sig.iter().zip(&self.targets).all(|(o, t)| is_prefix(o, t)) && sig.iter().any(|o| !o.is_empty())
    }

    fn exact(&self, sig: &[Vec<char>]) -> bool {
        sig.iter().zip(&self.targets).all(|(o, t)| o == t)
    }
}

/// All substring expressions as spans, one per class of equal per-example spans.
fn substring_classes(ctx: &StrCtx, budget: &mut Budget) -> Result<HashMap<Vec<(usize, usize)>, (usize, Substring)>> {
    let mut out: HashMap<Vec<(usize, usize)>, (usize, Substring)> = HashMap::new();
    let mut offer = |spans: Vec<(usize, usize)>, sub: Substring| {
        let size = sub.size();
        out.entry(spans)
            .and_modify(|slot| keep_better(slot, size, &sub))
            .or_insert((size, sub));
    };
    let n = ctx.inputs.len();
    let eval_all = |sub: &Substring| -> Option<Vec<(usize, usize)>> {
        (0..n)
            .map(|j| substring_span(sub, ctx.inputs[j].len(), &ctx.tables[j]).ok())
            .collect()
    };

    // SubStr: positions collapse to few distinct per-example indices
    let mut by_key: HashMap<Vec<usize>, i8> = HashMap::new();
    if ctx.inputs.iter().all(|s| !s.is_empty()) {
        for k in POSITION_RANGE {
            let probe = Substring::SubStr(k, k);
            let Some(spans) = eval_all(&probe) else { continue };
            let key: Vec<usize> = spans.iter().map(|s| s.0).collect();
            by_key
                .entry(key)
                .and_modify(|cur| {
                    if k.to_string() < cur.to_string() {
                        *cur = k;
                    }
                })
                .or_insert(k);
        }
    }
    let positions: Vec<(Vec<usize>, i8)> = by_key.into_iter().collect();
    budget.spend(positions.len() * positions.len())?;
    for (a, k1) in &positions {
        for (b, k2) in &positions {
            if a.iter().zip(b).all(|(x, y)| x <= y) {
                let spans = a.iter().zip(b).map(|(&x, &y)| (x, y + 1)).collect();
                offer(spans, Substring::SubStr(*k1, *k2));
            }
        }
    }

    let regexes = Regex::all();
    // GetSpan: compose from distinct anchor positions
    let mut anchors: HashMap<Vec<usize>, (Regex, i8, Boundary)> = HashMap::new();
    for &r in &regexes {
        for &i in &INDICES {
            for b in [Boundary::Start, Boundary::End] {
                let probe = Substring::GetSpan(r, i, b, r, i, b);
                let Some(spans) = eval_all(&probe) else { continue };
                let key: Vec<usize> = spans.iter().map(|s| s.0).collect();
                let cand = (r, i, b);
                anchors
                    .entry(key)
                    .and_modify(|cur| {
                        let render = |a: &(Regex, i8, Boundary)| format!("{}, {}, {:?}", a.0, a.1, a.2);
                        if render(&cand) < render(cur) {
                            *cur = cand;
                        }
                    })
                    .or_insert(cand);
            }
        }
    }
    let anchors: Vec<(Vec<usize>, (Regex, i8, Boundary))> = anchors.into_iter().collect();
    budget.spend(anchors.len() * anchors.len())?;
    for (a, (r1, i1, b1)) in &anchors {
        for (b, (r2, i2, b2)) in &anchors {
            if a.iter().zip(b).all(|(x, y)| x <= y) {
                let spans = a.iter().zip(b).map(|(&x, &y)| (x, y)).collect();
                offer(spans, Substring::GetSpan(*r1, *i1, *b1, *r2, *i2, *b2));
            }
        }
    }

    budget.spend(regexes.len() * INDICES.len() * 3)?;
    for &r in &regexes {
        for &i in &INDICES {
            for sub in [Substring::GetUpto(r, i), Substring::GetFrom(r, i), Substring::GetToken(r, i)] {
                if let Some(spans) = eval_all(&sub) {
                    offer(spans, sub);
                }
            }
        }
    }
    Ok(out)
}

fn all_modifications(chars: &[char]) -> Vec<Modification> {
    let regexes = Regex::all();
    let mut mods: Vec<Modification> = Case::ALL.into_iter().map(Modification::ToCase).collect();
    for &a in chars {
        for &b in chars {
            mods.push(Modification::Replace(a, b));
        }
    }
    mods.push(Modification::Trim);
    for &r in &regexes {
        for &i in &INDICES {
            mods.push(Modification::GetFirst(r, i));
            mods.push(Modification::Remove(r, i));
            for &c in chars {
                mods.push(Modification::Substitute(r, i, c));
            }
        }
        mods.push(Modification::GetAll(r));
        mods.push(Modification::RemoveAll(r));
        for &c in chars {
            mods.push(Modification::SubstituteAll(r, c));
        }
    }
    mods
}

fn mod_chars(m: &Modification) -> Vec<char> {
    match *m {
        Modification::Replace(a, b) => vec![a, b],
        Modification::Substitute(_, _, c) | Modification::SubstituteAll(_, c) => vec![c],
        _ => Vec::new(),
    }
}

/// Characters worth trying inside a `Compose`: everything seen in the inputs
/// or targets (in either case), every delimiter, and one stand-in for each of
/// the unseen lowercase letters, uppercase letters and digits. Unseen chars of
/// one kind are interchangeable under every regex and case function, so one
/// stand-in covers the rest.
fn compose_chars(ctx: &StrCtx) -> HashSet<char> {
    let mut seen: HashSet<char> = ctx
        .inputs
        .iter()
        .chain(&ctx.targets)
        .flatten()
        .flat_map(|c| [c.to_ascii_lowercase(), c.to_ascii_uppercase()])
        .collect();
    seen.extend(crate::string_dsl::DELIMITERS);
    for range in ['a'..='z', 'A'..='Z', '0'..='9'] {
        if let Some(c) = range.clone().find(|c| !seen.contains(c)) {
            seen.insert(c);
        }
    }
    seen
}

/// Match tables of intermediate strings, keyed by content.
#[derive(Default)]
struct TableCache {
    tables: HashMap<Vec<char>, MatchTable>,
}

impl TableCache {
    fn ensure(&mut self, s: &[char]) {
        if !self.tables.contains_key(s) {
            self.tables.insert(s.to_vec(), MatchTable::new(s));
        }
    }

    fn peek(&self, s: &[char]) -> &MatchTable {
        &self.tables[s]
    }
}

/// Outer modifications whose result on `u` can still be a target prefix.
/// Character parameters are read off the first example that pins them.
fn outer_candidates(u: &[Vec<char>], tables: &[&MatchTable], ctx: &StrCtx) -> Vec<Modification> {
    let t0 = tables[0];
    let mut out: Vec<Modification> = Case::ALL.into_iter().map(Modification::ToCase).collect();
    out.push(Modification::Trim);
    for r in Regex::all() {
        let m = t0.get(r).len();
        out.push(Modification::GetAll(r));
        out.push(Modification::RemoveAll(r));
        for &i in &INDICES {
            let Some(k) = resolve_index(i, m) else { continue };
            out.push(Modification::GetFirst(r, i));
            out.push(Modification::Remove(r, i));
            // Substitute: the new char lands where the replaced match started
            let a = t0.get(r)[k].0;
            if let Some(&c) = ctx.targets[0].get(a) {
                if is_grammar_char(c) {
                    out.push(Modification::Substitute(r, i, c));
                }
            }
        }
        // SubstituteAll: the first example with a match fixes the char
        for (j, table) in tables.iter().enumerate() {
            if let Some(&(a, _)) = table.get(r).first() {
                if let Some(&c) = ctx.targets[j].get(a) {
                    if is_grammar_char(c) {
                        out.push(Modification::SubstituteAll(r, c));
                    }
                }
                break;
            }
        }
    }
    // Replace: the first mismatch against the target fixes both chars
    for (s, t) in u.iter().zip(&ctx.targets) {
        if let Some(p) = s.iter().zip(t).position(|(a, b)| a != b) {
            if is_grammar_char(s[p]) && is_grammar_char(t[p]) {
                out.push(Modification::Replace(s[p], t[p]));
            }
            break;
        }
        if s.len() > t.len() {
            break;
        }
    }
    out
}

fn string_pool(spec: &IoSpec, node_cap: usize) -> Result<Vec<PoolEntry>> {
    let inputs: Vec<Vec<char>> = spec
        .examples
        .iter()
        .map(|e| e.input_text().expect("string spec").chars().collect())
        .collect();
    let targets: Vec<Vec<char>> = spec
        .targets()
        .map(|t| t.as_text().expect("string spec").chars().collect())
        .collect();
    let tables = inputs.iter().map(|s| MatchTable::new(s)).collect();
    let ctx = StrCtx { inputs, tables, targets };
    let n = ctx.inputs.len();
    let mut budget = Budget { used: 0, cap: node_cap };

    // inner classes: every substring and modification defined on all examples
    let mut inner: HashMap<Sig, (usize, Inner)> = HashMap::new();
    for (spans, (size, sub)) in substring_classes(&ctx, &mut budget)? {
        let sig: Sig = spans
            .iter()
            .zip(&ctx.inputs)
            .map(|(&(a, b), s)| s[a..b].to_vec())
            .collect();
        let e = Inner::Sub(sub);
        inner
            .entry(sig)
            .and_modify(|slot| keep_better(slot, size, &e))
            .or_insert((size, e));
    }
    let mut pool: HashMap<Sig, (usize, StringExpr)> = HashMap::new();
    let mut offer = |sig: Sig, size: usize, e: StringExpr| {
        pool.entry(sig)
            .and_modify(|slot| keep_better(slot, size, &e))
            .or_insert((size, e));
    };
    for (sig, (size, e)) in &inner {
        if let (true, Inner::Sub(s)) = (ctx.consistent(sig), e) {
            offer(sig.clone(), *size, StringExpr::Sub(*s));
        }
    }
    let mods = all_modifications(&all_characters());
    budget.spend(mods.len())?;
    let useful = compose_chars(&ctx);
    for m in &mods {
        let sig: Option<Sig> = (0..n)
            .map(|j| apply_modification(m, &ctx.inputs[j], &ctx.tables[j]).ok())
            .collect();
        let Some(sig) = sig else { continue };
        let size = m.size();
        if ctx.consistent(&sig) {
            offer(sig.clone(), size, StringExpr::Mod(*m));
        }
        if mod_chars(m).iter().all(|c| useful.contains(c)) {
            let e = Inner::Mod(*m);
            inner
                .entry(sig)
                .and_modify(|slot| keep_better(slot, size, &e))
                .or_insert((size, e));
        }
    }

    // Compose(outer, inner) over distinct inner classes
    let mut cache = TableCache::default();
    for (u, (inner_size, ie)) in &inner {
        for s in u {
            cache.ensure(s);
        }
        let tables: Vec<&MatchTable> = u.iter().map(|s| cache.peek(s)).collect();
        let outers = outer_candidates(u, &tables, &ctx);
        budget.spend(outers.len())?;
        'outer: for m in outers {
            let mut sig: Sig = Vec::with_capacity(n);
            for j in 0..n {
                match apply_modification(&m, &u[j], tables[j]) {
                    Ok(out) if is_prefix(&out, &ctx.targets[j]) => sig.push(out),
                    _ => continue 'outer,
                }
            }
            if sig.iter().all(|o| o.is_empty()) {
                continue;
            }
            offer(sig, 1 + m.size() + inner_size, StringExpr::Compose(m, *ie));
        }
    }

    // constants: only characters that start every target
    if let Some(&c) = ctx.targets[0].first() {
        if is_grammar_char(c) && ctx.targets.iter().all(|t| t.first() == Some(&c)) {
            offer(vec![vec![c]; n], 2, StringExpr::Const(c));
        }
    }

    Ok(pool
        .into_iter()
        .map(|(sig, (size, e))| {
            let tier = if ctx.exact(&sig) {
                0
            } else if matches!(e, StringExpr::Const(_)) {
                2
            } else {
                1
            };
            PoolEntry {
                outputs: sig.into_iter().map(|o| Value::Text(o.into_iter().collect())).collect(),
                subprogram: Subprogram::Str(e),
                tier,
                size,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// List domain

/// Every single statement over the variables bound in `spec`.
pub fn all_list_exprs(vars: &[(Var, Ty)]) -> Vec<ListExpr> {
    let lists: Vec<Var> = vars.iter().filter(|(_, t)| *t == Ty::List).map(|(v, _)| *v).collect();
    let ints: Vec<Var> = vars.iter().filter(|(_, t)| *t == Ty::Int).map(|(v, _)| *v).collect();
    let mut out = Vec::new();
    for &l in &lists {
        out.extend([
            ListExpr::Head(l),
            ListExpr::Last(l),
            ListExpr::Minimum(l),
            ListExpr::Maximum(l),
            ListExpr::Sum(l),
            ListExpr::Reverse(l),
            ListExpr::Sort(l),
        ]);
        for &n in &ints {
            out.extend([ListExpr::Access(n, l), ListExpr::Take(n, l), ListExpr::Drop(n, l)]);
        }
        out.extend(IntFn::ALL.map(|f| ListExpr::Map(f, l)));
        out.extend(Pred::ALL.map(|p| ListExpr::Filter(p, l)));
        out.extend(Pred::ALL.map(|p| ListExpr::Count(p, l)));
        for &m in &lists {
            out.extend(BinOp::ALL.map(|b| ListExpr::Zip(b, l, m)));
        }
        out.extend(BinOp::ALL.map(|b| ListExpr::Scanl1(b, l)));
    }
    out
}

fn list_pool(spec: &IoSpec, node_cap: usize) -> Result<Vec<PoolEntry>> {
    let vars = list_dsl::bound_vars(spec);
    let target = list_dsl::next_var(spec);
    let exprs = all_list_exprs(&vars);
    if exprs.len() > node_cap {
        return Err(SynthError::BudgetExhausted(format!("enumeration exceeded {node_cap} nodes")));
    }
    let existing: Vec<Vec<&Value>> = vars
        .iter()
        .map(|(v, _)| spec.examples.iter().map(|ex| &ex.inputs[&v.name()]).collect())
        .collect();
    let mut pool: HashMap<Vec<Value>, (usize, Statement)> = HashMap::new();
    for expr in exprs {
        let Ok(outs) = list_dsl::execute_on(&expr, spec) else { continue };
        // rebinding a value already held is useless unless it is the goal itself
        if existing.iter().any(|vals| vals.iter().zip(&outs).all(|(a, b)| *a == b)) && !spec.is_solved_by(&outs) {
            continue;
        }
        let stmt = Statement { target, expr };
        let size = expr.size();
        pool.entry(outs)
            .and_modify(|slot| keep_better(slot, size, &stmt))
            .or_insert((size, stmt));
    }
    Ok(pool
        .into_iter()
        .map(|(outs, (size, stmt))| PoolEntry {
            tier: if spec.is_solved_by(&outs) { 0 } else { 1 },
            outputs: outs,
            subprogram: Subprogram::List(stmt),
            size,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Example;

    fn str_spec(pairs: &[(&str, &str)]) -> IoSpec {
        IoSpec::new(
            Domain::String,
            pairs.iter().map(|(i, o)| Example::text(i, o).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn list_top_candidate_is_cumulative_max() {
        let l = |xs: &[i64]| Value::list(xs.to_vec()).unwrap();
        let ex = |x0: i64, x1: &[i64], y: &[i64]| {
            Example::new([("x0".to_string(), Value::Int(x0)), ("x1".to_string(), l(x1))], l(y))
        };
        let spec = IoSpec::new(
            Domain::List,
            vec![ex(1, &[-2, -25, 1], &[-2, -2, 1]), ex(3, &[4, 2, 9, 1], &[4, 4, 9, 9])],
        )
        .unwrap();
        let beam = enumerate_step(&spec, 10).unwrap();
        assert_eq!(beam[0].subprogram.to_string(), "x2 = Scanl1 (max) x1");
        assert!(beam.len() <= 10);
    }

    #[test]
    fn string_prefix_candidate() {
        let spec = str_spec(&[
            ("alan Turing1", "1.TURING,Alan"),
            ("donald KNUTH21", "21.KNUTH,Donald"),
            ("8:grace,HoppER&", "8.HOPPER,Grace"),
            ("DIJKSTRA edsger 99", "99.DIJKSTRA,Edsger"),
        ]);
        let beam = enumerate_step(&spec, 10).unwrap();
        let want: Vec<Value> = ["1", "21", "8", "99"].iter().map(|s| Value::text(*s).unwrap()).collect();
        assert!(beam.iter().any(|c| c.subprogram.execute(&spec).unwrap() == want));
    }

    #[test]
    fn exact_solver_ranks_first() {
        let spec = str_spec(&[("hello world", "HELLO"), ("big cat", "BIG")]);
        let beam = enumerate_step(&spec, 5).unwrap();
        let outs = beam[0].subprogram.execute(&spec).unwrap();
        assert!(spec.is_solved_by(&outs), "{}", beam[0].subprogram);
    }

    #[test]
    fn empty_targets_give_empty_beam() {
        let spec = str_spec(&[("abc", ""), ("de", "")]);
        assert!(enumerate_step(&spec, 10).unwrap().is_empty());
    }

    #[test]
    fn deterministic() {
        let spec = str_spec(&[("a.b c", "B."), ("x.y z", "Y.")]);
        let a = enumerate_step(&spec, 10).unwrap();
        let b = enumerate_step(&spec, 10).unwrap();
        assert_eq!(a, b);
    }
}
