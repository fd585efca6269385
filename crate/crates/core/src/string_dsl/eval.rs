//! Interpreter for string-DSL expressions.
//!
//! Regex classes follow leftmost, non-overlapping, greedy matching:
//! NUMBER `[0-9]+`, WORD `[A-Za-z]+`, ALPHANUM `[A-Za-z0-9]+`, ALL_CAPS `[A-Z]+`,
//! PROPER_CASE `[A-Z][a-z]+`, LOWER `[a-z]+`, DIGIT `[0-9]`, CHAR `[A-Za-z0-9]`,
//! and a delimiter matches itself.

use super::ast::*;
use crate::error::{Result, SynthError};

pub type Span = (usize, usize);

pub const REGEX_COUNT: usize = 8 + DELIMITERS.len();

pub fn regex_id(r: Regex) -> usize {
    match r {
        Regex::Number => 0,
        Regex::Word => 1,
        Regex::Alphanum => 2,
        Regex::AllCaps => 3,
        Regex::ProperCase => 4,
        Regex::Lower => 5,
        Regex::Digit => 6,
        Regex::Char => 7,
        Regex::Delim(c) => 8 + DELIMITERS.iter().position(|&d| d == c).expect("known delimiter"),
    }
}

fn runs(s: &[char], pred: impl Fn(char) -> bool, out: &mut Vec<Span>) {
    let mut i = 0;
    while i < s.len() {
        if pred(s[i]) {
            let start = i;
            while i < s.len() && pred(s[i]) {
                i += 1;
            }
            out.push((start, i));
        } else {
            i += 1;
        }
    }
}

fn singles(s: &[char], pred: impl Fn(char) -> bool, out: &mut Vec<Span>) {
    out.extend(
        s.iter()
            .enumerate()
            .filter(|(_, c)| pred(**c))
            .map(|(i, _)| (i, i + 1)),
    );
}

/// All matches of `r` in `s`, left to right.
pub fn find_matches(r: Regex, s: &[char], out: &mut Vec<Span>) {
    out.clear();
    match r {
        Regex::Number => runs(s, |c| c.is_ascii_digit(), out),
        Regex::Word => runs(s, |c| c.is_ascii_alphabetic(), out),
        Regex::Alphanum => runs(s, |c| c.is_ascii_alphanumeric(), out),
        Regex::AllCaps => runs(s, |c| c.is_ascii_uppercase(), out),
        Regex::Lower => runs(s, |c| c.is_ascii_lowercase(), out),
        Regex::ProperCase => {
            let mut i = 0;
            while i + 1 < s.len() {
                if s[i].is_ascii_uppercase() && s[i + 1].is_ascii_lowercase() {
                    let start = i;
                    i += 2;
                    while i < s.len() && s[i].is_ascii_lowercase() {
                        i += 1;
                    }
                    out.push((start, i));
                } else {
                    i += 1;
                }
            }
        }
        Regex::Digit => singles(s, |c| c.is_ascii_digit(), out),
        Regex::Char => singles(s, |c| c.is_ascii_alphanumeric(), out),
        Regex::Delim(d) => singles(s, |c| c == d, out),
    }
}

/// Matches of every regex over one string.
#[derive(Debug, Clone)]
pub struct MatchTable {
    spans: Vec<Vec<Span>>,
}

impl MatchTable {
    pub fn new(s: &[char]) -> Self {
        let mut spans = Vec::with_capacity(REGEX_COUNT);
        let mut buf = Vec::new();
        for r in Regex::all() {
            find_matches(r, s, &mut buf);
            spans.push(buf.clone());
        }
        MatchTable { spans }
    }

    pub fn get(&self, r: Regex) -> &[Span] {
        &self.spans[regex_id(r)]
    }
}

/// Resolve a 1-based (negative: from the end) match index.
pub fn resolve_index(i: i8, count: usize) -> Option<usize> {
    let i = i as i64;
    let count = count as i64;
    let idx = if i > 0 { i - 1 } else { count + i };
    (idx >= 0 && idx < count && i != 0).then_some(idx as usize)
}

fn nth(spans: &[Span], r: Regex, i: i8) -> Result<Span> {
    resolve_index(i, spans.len())
        .map(|k| spans[k])
        .ok_or_else(|| SynthError::exec(format!("no match {i} of {r}")))
}

/// Normalize a `SubStr` position to a 0-based char index in `0..len`.
fn position(k: i8, len: usize) -> usize {
    let len_i = len as i64;
    let k = k as i64;
    let one_based = match k {
        0 => 1,
        k if k > 0 => k,
        k => len_i + 1 + k,
    };
    (one_based.clamp(1, len_i.max(1)) - 1) as usize
}

/// Evaluate a substring operation to a char span of `s`.
pub fn substring_span(sub: &Substring, len: usize, table: &MatchTable) -> Result<Span> {
    match *sub {
        Substring::SubStr(k1, k2) => {
            if len == 0 {
                return Err(SynthError::exec("SubStr on empty input"));
            }
            let a = position(k1, len);
            let b = position(k2, len);
            if a > b {
                return Err(SynthError::exec(format!("SubStr({k1}, {k2}) span is reversed")));
            }
            Ok((a, b + 1))
        }
        Substring::GetSpan(r1, i1, b1, r2, i2, b2) => {
            let m1 = nth(table.get(r1), r1, i1)?;
            let m2 = nth(table.get(r2), r2, i2)?;
            let start = if b1 == Boundary::Start { m1.0 } else { m1.1 };
            let end = if b2 == Boundary::Start { m2.0 } else { m2.1 };
            if start > end {
                return Err(SynthError::exec("GetSpan endpoints cross"));
            }
            Ok((start, end))
        }
        Substring::GetUpto(r, i) => Ok((0, nth(table.get(r), r, i)?.1)),
        Substring::GetFrom(r, i) => Ok((nth(table.get(r), r, i)?.1, len)),
        Substring::GetToken(r, i) => nth(table.get(r), r, i),
    }
}

fn to_case(case: Case, s: &[char]) -> Vec<char> {
    match case {
        Case::AllCaps => s.iter().map(|c| c.to_ascii_uppercase()).collect(),
        Case::Lower => s.iter().map(|c| c.to_ascii_lowercase()).collect(),
        Case::Proper => {
            let mut prev_letter = false;
            s.iter()
                .map(|&c| {
                    let out = if prev_letter {
                        c.to_ascii_lowercase()
                    } else {
                        c.to_ascii_uppercase()
                    };
                    prev_letter = c.is_ascii_alphabetic();
                    out
                })
                .collect()
        }
    }
}

fn splice(s: &[char], spans: &[Span], with: Option<char>) -> Vec<char> {
    let mut out = Vec::with_capacity(s.len());
    let mut at = 0;
    for &(a, b) in spans {
        out.extend_from_slice(&s[at..a]);
        out.extend(with);
        at = b;
    }
    out.extend_from_slice(&s[at..]);
    out
}

/// Apply a modification to `s`, whose matches are in `table`.
pub fn apply_modification(m: &Modification, s: &[char], table: &MatchTable) -> Result<Vec<char>> {
    Ok(match *m {
        Modification::ToCase(case) => to_case(case, s),
        Modification::Replace(a, b) => s.iter().map(|&c| if c == a { b } else { c }).collect(),
        Modification::Trim => {
            let start = s.iter().position(|&c| c != ' ').unwrap_or(s.len());
            let end = s.iter().rposition(|&c| c != ' ').map_or(start, |p| p + 1);
            s[start..end].to_vec()
        }
        Modification::GetFirst(r, i) => {
            let spans = table.get(r);
            let k = resolve_index(i, spans.len())
                .ok_or_else(|| SynthError::exec(format!("no match {i} of {r}")))?;
            spans[..=k]
                .iter()
                .flat_map(|&(a, b)| s[a..b].iter().copied())
                .collect()
        }
        Modification::GetAll(r) => table
            .get(r)
            .iter()
            .flat_map(|&(a, b)| s[a..b].iter().copied())
            .collect(),
        Modification::Substitute(r, i, c) => {
            let span = nth(table.get(r), r, i)?;
            splice(s, &[span], Some(c))
        }
        Modification::SubstituteAll(r, c) => splice(s, table.get(r), Some(c)),
        Modification::Remove(r, i) => {
            let span = nth(table.get(r), r, i)?;
            splice(s, &[span], None)
        }
        Modification::RemoveAll(r) => splice(s, table.get(r), None),
    })
}

pub(crate) fn eval_inner(inner: &Inner, s: &[char], table: &MatchTable) -> Result<Vec<char>> {
    match inner {
        Inner::Sub(sub) => {
            let (a, b) = substring_span(sub, s.len(), table)?;
            Ok(s[a..b].to_vec())
        }
        Inner::Mod(m) => apply_modification(m, s, table),
    }
}

/// Evaluate over a prepared input.
pub fn eval_chars(expr: &StringExpr, s: &[char], table: &MatchTable) -> Result<Vec<char>> {
    match expr {
        StringExpr::Const(c) => Ok(vec![*c]),
        StringExpr::Sub(sub) => eval_inner(&Inner::Sub(*sub), s, table),
        StringExpr::Mod(m) => apply_modification(m, s, table),
        StringExpr::Compose(outer, inner) => {
            let mid = eval_inner(inner, s, table)?;
            let mid_table = MatchTable::new(&mid);
            apply_modification(outer, &mid, &mid_table)
        }
    }
}

/// Evaluate one expression on an input string.
pub fn eval_string_expr(expr: &StringExpr, input: &str) -> Result<String> {
    let chars: Vec<char> = input.chars().collect();
    let table = MatchTable::new(&chars);
    Ok(eval_chars(expr, &chars, &table)?.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans(r: Regex, s: &str) -> Vec<String> {
        let cs: Vec<char> = s.chars().collect();
        let mut out = Vec::new();
        find_matches(r, &cs, &mut out);
        out.iter().map(|&(a, b)| cs[a..b].iter().collect()).collect()
    }

    #[test]
    fn regex_classes() {
        assert_eq!(spans(Regex::Number, "EDSGER99 DIJKSTRA"), ["99"]);
        assert_eq!(spans(Regex::Word, "alan Turing1"), ["alan", "Turing"]);
        assert_eq!(spans(Regex::AllCaps, "HoppR&"), ["H", "R"]);
        assert_eq!(spans(Regex::ProperCase, "HoppR knuTh Ab"), ["Hopp", "Th", "Ab"]);
        assert_eq!(spans(Regex::Lower, "knuTh"), ["knu", "h"]);
        assert_eq!(spans(Regex::Digit, "a12"), ["1", "2"]);
        assert_eq!(spans(Regex::Alphanum, "ab1 c"), ["ab1", "c"]);
        assert_eq!(spans(Regex::Delim('.'), "a.b."), [".", "."]);
    }

    fn ev(e: StringExpr, s: &str) -> Result<String> {
        eval_string_expr(&e, s)
    }

    #[test]
    fn worked_steps() {
        assert_eq!(ev(StringExpr::Mod(Modification::GetAll(Regex::Number)), "alan Turing1").unwrap(), "1");
        assert_eq!(ev(StringExpr::Const('.'), "anything").unwrap(), ".");
        let upper_last = StringExpr::Compose(
            Modification::ToCase(Case::AllCaps),
            Inner::Sub(Substring::GetToken(Regex::Word, -1)),
        );
        assert_eq!(ev(upper_last, "alan Turing1").unwrap(), "TURING");
        assert_eq!(ev(StringExpr::Mod(Modification::Trim), "  ab ").unwrap(), "ab");
    }

    #[test]
    fn substr_positions() {
        let s = "abcdef";
        assert_eq!(ev(StringExpr::Sub(Substring::SubStr(1, 3)), s).unwrap(), "abc");
        assert_eq!(ev(StringExpr::Sub(Substring::SubStr(-2, -1)), s).unwrap(), "ef");
        assert_eq!(ev(StringExpr::Sub(Substring::SubStr(0, 1)), s).unwrap(), "a");
        assert_eq!(ev(StringExpr::Sub(Substring::SubStr(2, 100)), s).unwrap(), "bcdef");
        assert!(ev(StringExpr::Sub(Substring::SubStr(4, 2)), s).is_err());
        assert!(ev(StringExpr::Sub(Substring::SubStr(1, 1)), "").is_err());
    }

    #[test]
    fn span_and_boundaries() {
        let s = "CA, SAN DIEGO";
        assert_eq!(ev(StringExpr::Sub(Substring::GetUpto(Regex::Delim(','), 1)), s).unwrap(), "CA,");
        assert_eq!(ev(StringExpr::Sub(Substring::GetFrom(Regex::Delim(' '), 1)), s).unwrap(), "SAN DIEGO");
        let span = Substring::GetSpan(Regex::Word, 2, Boundary::Start, Regex::Word, -1, Boundary::End);
        assert_eq!(ev(StringExpr::Sub(span), s).unwrap(), "SAN DIEGO");
        let crossed = Substring::GetSpan(Regex::Word, -1, Boundary::End, Regex::Word, 1, Boundary::Start);
        assert!(ev(StringExpr::Sub(crossed), s).is_err());
        assert!(ev(StringExpr::Sub(Substring::GetToken(Regex::Number, 1)), s).is_err());
    }

    #[test]
    fn modifications() {
        let m = |m: Modification, s: &str| ev(StringExpr::Mod(m), s).unwrap();
        assert_eq!(m(Modification::ToCase(Case::Proper), "san diego1x"), "San Diego1X");
        assert_eq!(m(Modification::Replace(' ', '-'), "a b c"), "a-b-c");
        assert_eq!(m(Modification::GetFirst(Regex::Digit, 2), "a1b2c3"), "12");
        assert_eq!(m(Modification::GetFirst(Regex::Digit, -1), "a1b2c3"), "123");
        assert_eq!(m(Modification::GetAll(Regex::Word), "ab 12 cd"), "abcd");
        assert_eq!(m(Modification::Substitute(Regex::Word, 2, '#'), "ab 12 cd"), "ab 12 #");
        assert_eq!(m(Modification::SubstituteAll(Regex::Number, '0'), "a12b3"), "a0b0");
        assert_eq!(m(Modification::Remove(Regex::Word, 1), "ab 12"), " 12");
        assert_eq!(m(Modification::RemoveAll(Regex::Delim(' ')), "a b c"), "abc");
        assert!(ev(StringExpr::Mod(Modification::Remove(Regex::Word, 3)), "ab cd").is_err());
    }

    #[test]
    fn deterministic() {
        let e = StringExpr::Compose(
            Modification::ToCase(Case::Proper),
            Inner::Sub(Substring::GetToken(Regex::Word, 1)),
        );
        let a = ev(e, "21.Donald@knuTh").unwrap();
        assert_eq!(a, "Donald");
        assert_eq!(a, ev(e, "21.Donald@knuTh").unwrap());
    }
}
