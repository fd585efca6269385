//! Canonical syntax: `x0 = INPUT | x1 = INPUT | x2 = Sort x1 | x3 = Zip (min) x1 x2`.

use super::ast::*;
use crate::error::{Result, SynthError};

const OPS: &[&str] = &[
    "Head", "Last", "Access", "Minimum", "Maximum", "Sum", "Take", "Drop", "Reverse", "Sort",
    "Map", "Filter", "Count", "Zip", "Scanl1",
];

struct Words<'a> {
    text: &'a str,
    at: usize,
}

impl<'a> Words<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.at..].chars().next() {
            if c.is_whitespace() {
                self.at += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next word; a parenthesized lambda is one word.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.at;
        let rest = &self.text[start..];
        if rest.is_empty() {
            return None;
        }
        let len = if rest.starts_with('(') {
            let mut depth = 0i32;
            let mut end = rest.len();
            for (i, c) in rest.char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            end = i + 1;
                            break;
                        }
                    }
                    _ => {}
                }
            }
            end
        } else {
            rest.find(char::is_whitespace).unwrap_or(rest.len())
        };
        self.at += len;
        Some((start, &rest[..len]))
    }
}

fn lambda<T: Copy>(pos: usize, word: Option<(usize, &str)>, all: &[T], token: fn(T) -> &'static str) -> Result<T> {
    let expected: Vec<&str> = all.iter().map(|&t| token(t)).collect();
    match word {
        Some((p, w)) => {
            let compact: String = w.chars().filter(|c| !c.is_whitespace()).collect();
            all.iter()
                .copied()
                .find(|&t| token(t) == compact)
                .ok_or_else(|| SynthError::parse(p, &expected, format!("unknown lambda `{w}`")))
        }
        None => Err(SynthError::parse(pos, &expected, "missing lambda")),
    }
}

fn operand(pos: usize, word: Option<(usize, &str)>, bound: &dyn Fn(Var) -> bool) -> Result<Var> {
    match word {
        Some((p, w)) => match Var::parse(w) {
            Some(v) if bound(v) => Ok(v),
            Some(v) => Err(SynthError::parse(p, &["bound variable"], format!("{v} is unbound"))),
            None => Err(SynthError::parse(p, &["variable"], format!("`{w}` is not a variable"))),
        },
        None => Err(SynthError::parse(pos, &["variable"], "missing operand")),
    }
}

/// Parse `Op args` with operands resolved by `bound`. `offset` shifts reported positions.
fn parse_expr_at<'a>(text: &'a str, offset: usize, bound: &dyn Fn(Var) -> bool) -> Result<ListExpr> {
    let mut w = Words { text, at: 0 };
    let end = text.len() + offset;
    let shift = |x: Option<(usize, &'a str)>| x.map(|(p, s)| (p + offset, s));
    let (p, op) = shift(w.next()).ok_or_else(|| SynthError::parse(end, OPS, "missing operation"))?;
    macro_rules! var {
        () => {
            operand(end, shift(w.next()), bound)?
        };
    }
    use ListExpr::*;
    let expr = match op {
        "Head" => Head(var!()),
        "Last" => Last(var!()),
        "Access" => {
            let n = var!();
            Access(n, var!())
        }
        "Minimum" => Minimum(var!()),
        "Maximum" => Maximum(var!()),
        "Sum" => Sum(var!()),
        "Take" => {
            let n = var!();
            Take(n, var!())
        }
        "Drop" => {
            let n = var!();
            Drop(n, var!())
        }
        "Reverse" => Reverse(var!()),
        "Sort" => Sort(var!()),
        "Map" => {
            let f = lambda(end, shift(w.next()), &IntFn::ALL, IntFn::token)?;
            Map(f, var!())
        }
        "Filter" | "Count" => {
            let pr = lambda(end, shift(w.next()), &Pred::ALL, Pred::token)?;
            let l = var!();
            if op == "Filter" {
                Filter(pr, l)
            } else {
                Count(pr, l)
            }
        }
        "Zip" => {
            let b = lambda(end, shift(w.next()), &BinOp::ALL, BinOp::token)?;
            let x = var!();
            Zip(b, x, var!())
        }
        "Scanl1" => {
            let b = lambda(end, shift(w.next()), &BinOp::ALL, BinOp::token)?;
            Scanl1(b, var!())
        }
        other => return Err(SynthError::parse(p, OPS, format!("unknown operation `{other}`"))),
    };
    if let Some((p, extra)) = shift(w.next()) {
        return Err(SynthError::parse(p, &["`|`", "end of input"], format!("unexpected `{extra}`")));
    }
    Ok(expr)
}

/// Split `text` at `|`, returning each piece with its byte offset.
fn pieces(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if c == '|' {
            out.push((start, &text[start..i]));
            start = i + 1;
        }
    }
    out.push((start, &text[start..]));
    out
}

fn split_assignment(piece: &str, offset: usize) -> Result<(Var, usize, &str)> {
    let Some(eq) = piece.find('=') else {
        return Err(SynthError::parse(offset + piece.len(), &["="], "missing `=`"));
    };
    let lhs = piece[..eq].trim();
    let lhs_pos = offset + piece.len() - piece.trim_start().len();
    let target = Var::parse(lhs)
        .ok_or_else(|| SynthError::parse(lhs_pos, &["variable"], format!("bad target `{lhs}`")))?;
    Ok((target, offset + eq + 1, &piece[eq + 1..]))
}

/// Parse one statement whose operands must satisfy `bound`.
pub fn parse_statement(text: &str, bound: &dyn Fn(Var) -> bool) -> Result<Statement> {
    let (target, rhs_at, rhs) = split_assignment(text, 0)?;
    let expr = parse_expr_at(rhs, rhs_at, bound)?;
    Ok(Statement { target, expr })
}

pub fn parse_list_program(text: &str) -> Result<ListProgram> {
    let mut num_inputs = 0u32;
    let mut statements = Vec::new();
    for (offset, piece) in pieces(text) {
        let (target, rhs_at, rhs) = split_assignment(piece, offset)?;
        let next = Var(num_inputs + statements.len() as u32);
        if target != next {
            return Err(SynthError::parse(offset, &[next.name().as_str()], format!("expected target {next}, found {target}")));
        }
        if rhs.trim() == "INPUT" {
            if !statements.is_empty() {
                return Err(SynthError::parse(rhs_at, &["operation"], "INPUT after statements"));
            }
            num_inputs += 1;
            continue;
        }
        let expr = parse_expr_at(rhs, rhs_at, &|v: Var| v < target)?;
        statements.push(Statement { target, expr });
    }
    if statements.is_empty() {
        return Err(SynthError::parse(text.len(), &["statement"], "program has no statements"));
    }
    Ok(ListProgram { num_inputs, statements })
}

pub fn render_list_program(p: &ListProgram) -> String {
    p.to_string()
}
