use std::fmt;

/// A variable `xN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn name(self) -> String {
        format!("x{}", self.0)
    }

    pub fn parse(s: &str) -> Option<Var> {
        let digits = s.strip_prefix('x')?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if digits.len() > 1 && digits.starts_with('0') {
            return None;
        }
        digits.parse().ok().map(Var)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Static type of a list-domain value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ty {
    Int,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntFn {
    Inc,
    Dec,
    Double,
    Half,
    Negate,
    Square,
    Triple,
    Third,
    Quadruple,
    Quarter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    Positive,
    Negative,
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Min,
    Max,
}

impl IntFn {
    pub const ALL: [IntFn; 10] = [
        IntFn::Inc,
        IntFn::Dec,
        IntFn::Double,
        IntFn::Half,
        IntFn::Negate,
        IntFn::Square,
        IntFn::Triple,
        IntFn::Third,
        IntFn::Quadruple,
        IntFn::Quarter,
    ];

    pub fn token(self) -> &'static str {
        match self {
            IntFn::Inc => "(+1)",
            IntFn::Dec => "(-1)",
            IntFn::Double => "(*2)",
            IntFn::Half => "(/2)",
            IntFn::Negate => "(*(-1))",
            IntFn::Square => "(**2)",
            IntFn::Triple => "(*3)",
            IntFn::Third => "(/3)",
            IntFn::Quadruple => "(*4)",
            IntFn::Quarter => "(/4)",
        }
    }

    /// Integer division truncates toward zero.
    pub fn apply(self, x: i64) -> i64 {
        match self {
            IntFn::Inc => x + 1,
            IntFn::Dec => x - 1,
            IntFn::Double => x * 2,
            IntFn::Half => x / 2,
            IntFn::Negate => -x,
            IntFn::Square => x * x,
            IntFn::Triple => x * 3,
            IntFn::Third => x / 3,
            IntFn::Quadruple => x * 4,
            IntFn::Quarter => x / 4,
        }
    }
}

impl Pred {
    pub const ALL: [Pred; 4] = [Pred::Positive, Pred::Negative, Pred::Even, Pred::Odd];

    pub fn token(self) -> &'static str {
        match self {
            Pred::Positive => "(>0)",
            Pred::Negative => "(<0)",
            Pred::Even => "(%2==0)",
            Pred::Odd => "(%2==1)",
        }
    }

    pub fn test(self, x: i64) -> bool {
        match self {
            Pred::Positive => x > 0,
            Pred::Negative => x < 0,
            Pred::Even => x.rem_euclid(2) == 0,
            Pred::Odd => x.rem_euclid(2) == 1,
        }
    }
}

impl BinOp {
    pub const ALL: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Min, BinOp::Max];

    pub fn token(self) -> &'static str {
        match self {
            BinOp::Add => "(+)",
            BinOp::Sub => "(-)",
            BinOp::Mul => "(*)",
            BinOp::Min => "(min)",
            BinOp::Max => "(max)",
        }
    }

    pub fn apply(self, a: i64, b: i64) -> i64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Min => a.min(b),
            BinOp::Max => a.max(b),
        }
    }
}

/// One operation over bound variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ListExpr {
    Head(Var),
    Last(Var),
    Access(Var, Var),
    Minimum(Var),
    Maximum(Var),
    Sum(Var),
    Take(Var, Var),
    Drop(Var, Var),
    Reverse(Var),
    Sort(Var),
    Map(IntFn, Var),
    Filter(Pred, Var),
    Count(Pred, Var),
    Zip(BinOp, Var, Var),
    Scanl1(BinOp, Var),
}

impl ListExpr {
    pub fn op_name(&self) -> &'static str {
        match self {
            ListExpr::Head(_) => "Head",
            ListExpr::Last(_) => "Last",
            ListExpr::Access(..) => "Access",
            ListExpr::Minimum(_) => "Minimum",
            ListExpr::Maximum(_) => "Maximum",
            ListExpr::Sum(_) => "Sum",
            ListExpr::Take(..) => "Take",
            ListExpr::Drop(..) => "Drop",
            ListExpr::Reverse(_) => "Reverse",
            ListExpr::Sort(_) => "Sort",
            ListExpr::Map(..) => "Map",
            ListExpr::Filter(..) => "Filter",
            ListExpr::Count(..) => "Count",
            ListExpr::Zip(..) => "Zip",
            ListExpr::Scanl1(..) => "Scanl1",
        }
    }

    pub fn result_type(&self) -> Ty {
        match self {
            ListExpr::Head(_)
            | ListExpr::Last(_)
            | ListExpr::Access(..)
            | ListExpr::Minimum(_)
            | ListExpr::Maximum(_)
            | ListExpr::Sum(_)
            | ListExpr::Count(..) => Ty::Int,
            _ => Ty::List,
        }
    }

    /// Operands paired with the type each position requires.
    pub fn operands(&self) -> Vec<(Var, Ty)> {
        use ListExpr::*;
        match *self {
            Head(l) | Last(l) | Minimum(l) | Maximum(l) | Sum(l) | Reverse(l) | Sort(l) => {
                vec![(l, Ty::List)]
            }
            Access(n, l) | Take(n, l) | Drop(n, l) => vec![(n, Ty::Int), (l, Ty::List)],
            Map(_, l) | Filter(_, l) | Count(_, l) | Scanl1(_, l) => vec![(l, Ty::List)],
            Zip(_, a, b) => vec![(a, Ty::List), (b, Ty::List)],
        }
    }

    pub fn map_vars(&self, f: impl Fn(Var) -> Var) -> ListExpr {
        use ListExpr::*;
        match *self {
            Head(l) => Head(f(l)),
            Last(l) => Last(f(l)),
            Access(n, l) => Access(f(n), f(l)),
            Minimum(l) => Minimum(f(l)),
            Maximum(l) => Maximum(f(l)),
            Sum(l) => Sum(f(l)),
            Take(n, l) => Take(f(n), f(l)),
            Drop(n, l) => Drop(f(n), f(l)),
            Reverse(l) => Reverse(f(l)),
            Sort(l) => Sort(f(l)),
            Map(g, l) => Map(g, f(l)),
            Filter(p, l) => Filter(p, f(l)),
            Count(p, l) => Count(p, f(l)),
            Zip(b, x, y) => Zip(b, f(x), f(y)),
            Scanl1(b, l) => Scanl1(b, f(l)),
        }
    }

    /// First-order operations plus `Map`.
    pub fn is_first_order_or_map(&self) -> bool {
        !matches!(
            self,
            ListExpr::Filter(..) | ListExpr::Count(..) | ListExpr::Zip(..) | ListExpr::Scanl1(..)
        )
    }

    /// Op node, plus one per lambda and per operand.
    pub fn size(&self) -> usize {
        let lambda = matches!(
            self,
            ListExpr::Map(..)
                | ListExpr::Filter(..)
                | ListExpr::Count(..)
                | ListExpr::Zip(..)
                | ListExpr::Scanl1(..)
        ) as usize;
        1 + lambda + self.operands().len()
    }
}

impl fmt::Display for ListExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.op_name())?;
        match self {
            ListExpr::Map(g, _) => write!(f, " {}", g.token())?,
            ListExpr::Filter(p, _) | ListExpr::Count(p, _) => write!(f, " {}", p.token())?,
            ListExpr::Zip(b, ..) | ListExpr::Scanl1(b, _) => write!(f, " {}", b.token())?,
            _ => {}
        }
        for (v, _) in self.operands() {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

/// `target = expr`; one step of a list program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Statement {
    pub target: Var,
    pub expr: ListExpr,
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.target, self.expr)
    }
}

/// Input declarations `x0 .. x{n-1}` followed by consecutively numbered statements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ListProgram {
    pub num_inputs: u32,
    pub statements: Vec<Statement>,
}

impl ListProgram {
    pub fn input_vars(&self) -> impl Iterator<Item = Var> {
        (0..self.num_inputs).map(Var)
    }

    pub fn output_var(&self) -> Var {
        self.statements.last().expect("non-empty program").target
    }
}

impl fmt::Display for ListProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in self.input_vars() {
            if !first {
                f.write_str(" | ")?;
            }
            first = false;
            write!(f, "{v} = INPUT")?;
        }
        for s in &self.statements {
            if !first {
                f.write_str(" | ")?;
            }
            first = false;
            write!(f, "{s}")?;
        }
        Ok(())
    }
}
