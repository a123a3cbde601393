use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    U,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryFn {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Neg,
}

impl UnaryFn {
    /// Callable functions by source name. `Neg` is only reachable through
    /// the prefix minus.
    pub const NAMED: [UnaryFn; 9] = [
        UnaryFn::Sin,
        UnaryFn::Cos,
        UnaryFn::Tan,
        UnaryFn::Sinh,
        UnaryFn::Cosh,
        UnaryFn::Exp,
        UnaryFn::Log,
        UnaryFn::Sqrt,
        UnaryFn::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Sinh => "sinh",
            UnaryFn::Cosh => "cosh",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
            UnaryFn::Neg => "neg",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryFn> {
        UnaryFn::NAMED.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Param(String),
    Unary(UnaryFn, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn unary(f: UnaryFn, e: Expr) -> Expr {
        Expr::Unary(f, Box::new(e))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => 1,
            Expr::Unary(_, e) => 1 + e.depth(),
            Expr::Binary(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Replace every occurrence of a variable by another expression.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        match self {
            Expr::Var(x) if *x == var => with.clone(),
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => self.clone(),
            Expr::Unary(f, e) => Expr::unary(*f, e.substitute(var, with)),
            Expr::Binary(op, l, r) => {
                Expr::binary(*op, l.substitute(var, with), r.substitute(var, with))
            }
        }
    }

    pub fn params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(p) => out.push(p.clone()),
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Unary(_, e) => e.params(out),
            Expr::Binary(_, l, r) => {
                l.params(out);
                r.params(out);
            }
        }
    }

    pub fn mentions_var(&self) -> bool {
        match self {
            Expr::Var(_) => true,
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Unary(_, e) => e.mentions_var(),
            Expr::Binary(_, l, r) => l.mentions_var() || r.mentions_var(),
        }
    }

    // Binding strength used by the printer: + - < * / < unary minus < ^ < atoms.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Unary(UnaryFn::Neg, _) => 3,
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(Var::U) => f.write_str("u"),
            Expr::Var(Var::V) => f.write_str("v"),
            Expr::Param(p) => f.write_str(p),
            Expr::Unary(UnaryFn::Neg, e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < 4)
            }
            Expr::Unary(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(BinOp::Pow, l, r) => {
                write_child(f, l, l.precedence() <= 4)?;
                f.write_str("^")?;
                write_child(f, r, r.precedence() < 3)
            }
            Expr::Binary(op, l, r) => {
                let p = self.precedence();
                write_child(f, l, l.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, r, r.precedence() <= p)
            }
        }
    }
}

/// A parsed surface `r(u, v) = [x, y, z]` with its parameter table.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceAst {
    pub components: [Expr; 3],
    pub params: BTreeMap<String, f64>,
}

impl fmt::Display for SurfaceAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = &self.components;
        write!(f, "[{x}, {y}, {z}]")
    }
}
