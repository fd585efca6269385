use std::fmt;

/// Delimiter characters usable both as literal regexes and as constants.
pub const DELIMITERS: [char; 16] = [
    '&', ',', '.', '?', '!', '@', '(', ')', '[', ']', '%', '#', '$', '"', '´', ' ',
];

/// Every `Character` constant of the grammar, in canonical order.
pub fn all_characters() -> Vec<char> {
    ('A'..='Z')
        .chain('a'..='z')
        .chain('0'..='9')
        .chain(DELIMITERS)
        .collect()
}

pub fn is_grammar_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || DELIMITERS.contains(&c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regex {
    Number,
    Word,
    Alphanum,
    AllCaps,
    ProperCase,
    Lower,
    Digit,
    Char,
    Delim(char),
}

impl Regex {
    pub const CLASSES: [Regex; 8] = [
        Regex::Number,
        Regex::Word,
        Regex::Alphanum,
        Regex::AllCaps,
        Regex::ProperCase,
        Regex::Lower,
        Regex::Digit,
        Regex::Char,
    ];

    pub fn all() -> Vec<Regex> {
        Regex::CLASSES
            .into_iter()
            .chain(DELIMITERS.into_iter().map(Regex::Delim))
            .collect()
    }

    pub fn name(self) -> Option<&'static str> {
        Some(match self {
            Regex::Number => "NUMBER",
            Regex::Word => "WORD",
            Regex::Alphanum => "ALPHANUM",
            Regex::AllCaps => "ALL_CAPS",
            Regex::ProperCase => "PROPER_CASE",
            Regex::Lower => "LOWER",
            Regex::Digit => "DIGIT",
            Regex::Char => "CHAR",
            Regex::Delim(_) => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    AllCaps,
    Proper,
    Lower,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::AllCaps, Case::Proper, Case::Lower];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Boundary {
    Start,
    End,
}

/// Legal match indices: -5..=-1 and 1..=5.
pub const INDICES: [i8; 10] = [-5, -4, -3, -2, -1, 1, 2, 3, 4, 5];
pub const POSITION_RANGE: std::ops::RangeInclusive<i8> = -100..=100;

pub fn valid_index(i: i64) -> bool {
    (-5..=5).contains(&i) && i != 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Substring {
    SubStr(i8, i8),
    GetSpan(Regex, i8, Boundary, Regex, i8, Boundary),
    GetUpto(Regex, i8),
    GetFrom(Regex, i8),
    GetToken(Regex, i8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modification {
    ToCase(Case),
    Replace(char, char),
    Trim,
    GetFirst(Regex, i8),
    GetAll(Regex),
    Substitute(Regex, i8, char),
    SubstituteAll(Regex, char),
    Remove(Regex, i8),
    RemoveAll(Regex),
}

/// Argument of a `Compose`: either a substring or another modification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inner {
    Sub(Substring),
    Mod(Modification),
}

/// One string-DSL expression; one step of a [`StringProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StringExpr {
    Const(char),
    Sub(Substring),
    Mod(Modification),
    Compose(Modification, Inner),
}

/// Concatenation of expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StringProgram {
    pub exprs: Vec<StringExpr>,
}

impl Substring {
    pub fn size(&self) -> usize {
        match self {
            Substring::SubStr(..) => 3,
            Substring::GetSpan(..) => 7,
            Substring::GetUpto(..) | Substring::GetFrom(..) | Substring::GetToken(..) => 3,
        }
    }
}

impl Modification {
    pub fn size(&self) -> usize {
        match self {
            Modification::ToCase(_) => 2,
            Modification::Replace(..) => 3,
            Modification::Trim => 1,
            Modification::GetFirst(..) => 3,
            Modification::GetAll(_) => 2,
            Modification::Substitute(..) => 4,
            Modification::SubstituteAll(..) => 3,
            Modification::Remove(..) => 3,
            Modification::RemoveAll(_) => 2,
        }
    }
}

impl Inner {
    pub fn size(&self) -> usize {
        match self {
            Inner::Sub(s) => s.size(),
            Inner::Mod(m) => m.size(),
        }
    }
}

impl StringExpr {
    /// Node count used for candidate ranking.
    pub fn size(&self) -> usize {
        match self {
            StringExpr::Const(_) => 2,
            StringExpr::Sub(s) => s.size(),
            StringExpr::Mod(m) => m.size(),
            StringExpr::Compose(m, inner) => 1 + m.size() + inner.size(),
        }
    }

    pub fn is_compose(&self) -> bool {
        matches!(self, StringExpr::Compose(..))
    }

    pub fn is_substring(&self) -> bool {
        matches!(self, StringExpr::Sub(_))
    }

    /// `Compose(m, s)` with a substring argument.
    pub fn nests_substring(&self) -> bool {
        matches!(self, StringExpr::Compose(_, Inner::Sub(_)))
    }
}

fn write_char(f: &mut fmt::Formatter<'_>, c: char) -> fmt::Result {
    write!(f, "'{c}'")
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regex::Delim(c) => write_char(f, *c),
            other => f.write_str(other.name().expect("named class")),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::AllCaps => "ALL_CAPS",
            Case::Proper => "PROPER",
            Case::Lower => "LOWER",
        })
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Start => "START",
            Boundary::End => "END",
        })
    }
}

impl fmt::Display for Substring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Substring::SubStr(a, b) => write!(f, "SubStr({a}, {b})"),
            Substring::GetSpan(r1, i1, b1, r2, i2, b2) => {
                write!(f, "GetSpan({r1}, {i1}, {b1}, {r2}, {i2}, {b2})")
            }
            Substring::GetUpto(r, i) => write!(f, "GetUpto({r}, {i})"),
            Substring::GetFrom(r, i) => write!(f, "GetFrom({r}, {i})"),
            Substring::GetToken(r, i) => write!(f, "GetToken({r}, {i})"),
        }
    }
}

impl fmt::Display for Modification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modification::ToCase(a) => write!(f, "ToCase({a})"),
            Modification::Replace(a, b) => write!(f, "Replace('{a}', '{b}')"),
            Modification::Trim => f.write_str("Trim()"),
            Modification::GetFirst(r, i) => write!(f, "GetFirst({r}, {i})"),
            Modification::GetAll(r) => write!(f, "GetAll({r})"),
            Modification::Substitute(r, i, c) => write!(f, "Substitute({r}, {i}, '{c}')"),
            Modification::SubstituteAll(r, c) => write!(f, "SubstituteAll({r}, '{c}')"),
            Modification::Remove(r, i) => write!(f, "Remove({r}, {i})"),
            Modification::RemoveAll(r) => write!(f, "RemoveAll({r})"),
        }
    }
}

impl fmt::Display for Inner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inner::Sub(s) => s.fmt(f),
            Inner::Mod(m) => m.fmt(f),
        }
    }
}

impl fmt::Display for StringExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StringExpr::Const(c) => write!(f, "Const('{c}')"),
            StringExpr::Sub(s) => s.fmt(f),
            StringExpr::Mod(m) => m.fmt(f),
            StringExpr::Compose(m, inner) => write!(f, "Compose({m}, {inner})"),
        }
    }
}

impl fmt::Display for StringProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exprs.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            e.fmt(f)?;
        }
        Ok(())
    }
}
