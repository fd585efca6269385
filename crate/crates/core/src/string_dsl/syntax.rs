//! Canonical surface syntax: `GetAll(NUMBER) | Const('.') | Compose(ToCase(ALL_CAPS), GetToken(WORD, -1))`.

use super::ast::*;
use crate::error::{Result, SynthError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Char(char),
    LParen,
    RParen,
    Comma,
    Pipe,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Char(c) => format!("'{c}'"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut toks = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '(' | ')' | ',' | '|' => {
                it.next();
                toks.push((
                    pos,
                    match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        _ => Tok::Pipe,
                    },
                ));
            }
            '\'' => {
                it.next();
                let (_, ch) = it
                    .next()
                    .ok_or_else(|| SynthError::parse(pos, &["character"], "unterminated literal"))?;
                match it.next() {
                    Some((_, '\'')) => toks.push((pos, Tok::Char(ch))),
                    _ => return Err(SynthError::parse(pos, &["'"], "unterminated character literal")),
                }
            }
            '-' | '0'..='9' => {
                let mut s = String::new();
                s.push(c);
                it.next();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                let n = s
                    .parse::<i64>()
                    .map_err(|_| SynthError::parse(pos, &["integer"], format!("bad integer `{s}`")))?;
                toks.push((pos, Tok::Int(n)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                toks.push((pos, Tok::Ident(s)));
            }
            other => {
                return Err(SynthError::parse(pos, &[], format!("unexpected character {other:?}")))
            }
        }
    }
    toks.push((text.len(), Tok::End));
    Ok(toks)
}

const REGEX_EXPECT: &[&str] = &[
    "NUMBER", "WORD", "ALPHANUM", "ALL_CAPS", "PROPER_CASE", "LOWER", "DIGIT", "CHAR", "delimiter",
];
const SUBSTRING_OPS: &[&str] = &["SubStr", "GetSpan", "GetUpto", "GetFrom", "GetToken"];
const MODIFICATION_OPS: &[&str] = &[
    "ToCase", "Replace", "Trim", "GetFirst", "GetAll", "Substitute", "SubstituteAll", "Remove",
    "RemoveAll",
];

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn next(&mut self) -> (usize, Tok) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        Err(SynthError::parse(
            self.pos(),
            expected,
            format!("unexpected {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            self.fail(&[name])
        }
    }

    fn comma(&mut self) -> Result<()> {
        self.expect(Tok::Comma, ",")
    }

    fn ident(&mut self, expected: &[&str]) -> Result<(usize, String)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.pos();
                self.next();
                Ok((p, s))
            }
            _ => self.fail(expected),
        }
    }

    fn int(&mut self, what: &str) -> Result<(usize, i64)> {
        match *self.peek() {
            Tok::Int(n) => {
                let p = self.pos();
                self.next();
                Ok((p, n))
            }
            _ => self.fail(&[what]),
        }
    }

    fn index(&mut self) -> Result<i8> {
        let (p, n) = self.int("index")?;
        if valid_index(n) {
            Ok(n as i8)
        } else {
            Err(SynthError::parse(p, &["-5..-1", "1..5"], format!("index {n} out of range")))
        }
    }

    fn position_arg(&mut self) -> Result<i8> {
        let (p, n) = self.int("position")?;
        if (-100..=100).contains(&n) {
            Ok(n as i8)
        } else {
            Err(SynthError::parse(p, &["-100..100"], format!("position {n} out of range")))
        }
    }

    fn character(&mut self) -> Result<char> {
        match *self.peek() {
            Tok::Char(c) if is_grammar_char(c) => {
                self.next();
                Ok(c)
            }
            _ => self.fail(&["character literal"]),
        }
    }

    fn regex(&mut self) -> Result<Regex> {
        match self.peek().clone() {
            Tok::Char(c) if DELIMITERS.contains(&c) => {
                self.next();
                Ok(Regex::Delim(c))
            }
            Tok::Ident(s) => {
                let r = Regex::CLASSES.into_iter().find(|r| r.name() == Some(s.as_str()));
                match r {
                    Some(r) => {
                        self.next();
                        Ok(r)
                    }
                    None => self.fail(REGEX_EXPECT),
                }
            }
            _ => self.fail(REGEX_EXPECT),
        }
    }

    fn case(&mut self) -> Result<Case> {
        let expected = ["ALL_CAPS", "PROPER", "LOWER"];
        match self.peek().clone() {
            Tok::Ident(s) => {
                let c = match s.as_str() {
                    "ALL_CAPS" => Case::AllCaps,
                    "PROPER" | "PROPER_CASE" => Case::Proper,
                    "LOWER" => Case::Lower,
                    _ => return self.fail(&expected),
                };
                self.next();
                Ok(c)
            }
            _ => self.fail(&expected),
        }
    }

    fn boundary(&mut self) -> Result<Boundary> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "START" => {
                self.next();
                Ok(Boundary::Start)
            }
            Tok::Ident(s) if s == "END" => {
                self.next();
                Ok(Boundary::End)
            }
            _ => self.fail(&["START", "END"]),
        }
    }

    fn substring_body(&mut self, name: &str) -> Result<Substring> {
        Ok(match name {
            "SubStr" => {
                let a = self.position_arg()?;
                self.comma()?;
                Substring::SubStr(a, self.position_arg()?)
            }
            "GetSpan" => {
                let r1 = self.regex()?;
                self.comma()?;
                let i1 = self.index()?;
                self.comma()?;
                let b1 = self.boundary()?;
                self.comma()?;
                let r2 = self.regex()?;
                self.comma()?;
                let i2 = self.index()?;
                self.comma()?;
                Substring::GetSpan(r1, i1, b1, r2, i2, self.boundary()?)
            }
            "GetUpto" | "GetFrom" | "GetToken" => {
                let r = self.regex()?;
                self.comma()?;
                let i = self.index()?;
                match name {
                    "GetUpto" => Substring::GetUpto(r, i),
                    "GetFrom" => Substring::GetFrom(r, i),
                    _ => Substring::GetToken(r, i),
                }
            }
            _ => unreachable!("caller checked the name"),
        })
    }

    fn modification_body(&mut self, name: &str) -> Result<Modification> {
        Ok(match name {
            "ToCase" => Modification::ToCase(self.case()?),
            "Replace" => {
                let a = self.character()?;
                self.comma()?;
                Modification::Replace(a, self.character()?)
            }
            "Trim" => Modification::Trim,
            "GetFirst" | "Remove" => {
                let r = self.regex()?;
                self.comma()?;
                let i = self.index()?;
                if name == "GetFirst" {
                    Modification::GetFirst(r, i)
                } else {
                    Modification::Remove(r, i)
                }
            }
            "GetAll" => Modification::GetAll(self.regex()?),
            "RemoveAll" => Modification::RemoveAll(self.regex()?),
            "Substitute" => {
                let r = self.regex()?;
                self.comma()?;
                let i = self.index()?;
                self.comma()?;
                Modification::Substitute(r, i, self.character()?)
            }
            "SubstituteAll" => {
                let r = self.regex()?;
                self.comma()?;
                Modification::SubstituteAll(r, self.character()?)
            }
            _ => unreachable!("caller checked the name"),
        })
    }

    /// Parse `Name(args)`; `Trim` may omit its empty parentheses.
    fn call<T>(&mut self, name: &str, body: impl FnOnce(&mut Self, &str) -> Result<T>) -> Result<T> {
        if name == "Trim" && *self.peek() != Tok::LParen {
            return body(self, name);
        }
        self.expect(Tok::LParen, "(")?;
        let v = body(self, name)?;
        self.expect(Tok::RParen, ")")?;
        Ok(v)
    }

    fn modification(&mut self) -> Result<Modification> {
        let (p, name) = self.ident(MODIFICATION_OPS)?;
        if !MODIFICATION_OPS.contains(&name.as_str()) {
            return Err(SynthError::parse(p, MODIFICATION_OPS, format!("`{name}` is not a modification")));
        }
        self.call(&name, |s, n| s.modification_body(n))
    }

    fn inner(&mut self) -> Result<Inner> {
        let (p, name) = self.ident(&["substring or modification"])?;
        if SUBSTRING_OPS.contains(&name.as_str()) {
            Ok(Inner::Sub(self.call(&name, |s, n| s.substring_body(n))?))
        } else if MODIFICATION_OPS.contains(&name.as_str()) {
            Ok(Inner::Mod(self.call(&name, |s, n| s.modification_body(n))?))
        } else {
            Err(SynthError::parse(p, &["substring or modification"], format!("`{name}` cannot be composed")))
        }
    }

    fn expr(&mut self) -> Result<StringExpr> {
        let (p, name) = self.ident(&["expression"])?;
        match name.as_str() {
            "Const" | "ConstStr" => {
                self.expect(Tok::LParen, "(")?;
                let c = self.character()?;
                self.expect(Tok::RParen, ")")?;
                Ok(StringExpr::Const(c))
            }
            "Compose" => {
                self.expect(Tok::LParen, "(")?;
                let outer = self.modification()?;
                self.comma()?;
                let inner = self.inner()?;
                self.expect(Tok::RParen, ")")?;
                Ok(StringExpr::Compose(outer, inner))
            }
            n if SUBSTRING_OPS.contains(&n) => Ok(StringExpr::Sub(self.call(n, |s, n| s.substring_body(n))?)),
            n if MODIFICATION_OPS.contains(&n) => {
                Ok(StringExpr::Mod(self.call(n, |s, n| s.modification_body(n))?))
            }
            _ => Err(SynthError::parse(p, &["Const", "Compose", "substring", "modification"], format!("unknown operation `{name}`"))),
        }
    }
}

/// Parse a single expression.
pub fn parse_string_expr(text: &str) -> Result<StringExpr> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["end of input"]);
    }
    Ok(e)
}

/// Parse a `|`-separated program.
pub fn parse_string_program(text: &str) -> Result<StringProgram> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let mut exprs = vec![p.expr()?];
    loop {
        match p.peek() {
            Tok::Pipe => {
                p.next();
                exprs.push(p.expr()?);
            }
            Tok::End => break,
            _ => return p.fail(&["|", "end of input"]),
        }
    }
    Ok(StringProgram { exprs })
}

pub fn render_string_program(p: &StringProgram) -> String {
    p.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_string_expr("Const(',')").unwrap(), StringExpr::Const(','));
        assert_eq!(
            parse_string_expr("GetToken(WORD, -1)").unwrap(),
            StringExpr::Sub(Substring::GetToken(Regex::Word, -1))
        );
        let err = parse_string_expr("GetToken(WORD, 0)").unwrap_err();
        assert_eq!(err.kind(), ErrorKind::ParseError);
        match err {
            SynthError::Parse(pe) => assert_eq!(pe.position, 15),
            _ => unreachable!(),
        }
    }

    #[test]
    fn renders_canonically() {
        assert_eq!(StringExpr::Const('.').to_string(), "Const('.')");
        let p = StringProgram {
            exprs: vec![StringExpr::Const('a'), StringExpr::Mod(Modification::Trim)],
        };
        assert_eq!(p.to_string(), "Const('a') | Trim()");
        let text = "GetAll(NUMBER) | Const('.') | Compose(ToCase(ALL_CAPS), GetToken(WORD, -1)) | Const(',') | Compose(ToCase(PROPER), GetToken(WORD, 1))";
        assert_eq!(parse_string_program(text).unwrap().to_string(), text);
    }

    #[test]
    fn delimiters_and_spans() {
        let text = "GetSpan(' ', 1, END, '´', -2, START) | Substitute('\"', 3, 'Z') | SubStr(-100, 100)";
        assert_eq!(parse_string_program(text).unwrap().to_string(), text);
    }

    #[test]
    fn rejects_bad_programs() {
        for bad in [
            "",
            "Const('x'",
            "Compose(GetToken(WORD, 1), Trim())",
            "SubStr(1, 101)",
            "GetAll(FOO)",
            "Const('~')",
            "Trim() Trim()",
            "Replace('a')",
        ] {
            assert!(parse_string_program(bad).is_err(), "{bad}");
        }
    }
}
