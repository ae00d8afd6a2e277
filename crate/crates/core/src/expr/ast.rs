use alloc::boxed::Box;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree. Variables are indices into the declared variable list of
/// the owning [`Expression`](super::Expression); `^` only takes a constant
/// exponent, stored inline.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => 1 + a.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    pub fn uses_var(&self, index: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == index,
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => a.uses_var(index),
            Expr::Binary(_, a, b) => a.uses_var(index) || b.uses_var(index),
        }
    }

    fn is_const(&self, c: f64) -> bool {
        matches!(self, Expr::Const(v) if *v == c)
    }

    fn add(a: Expr, b: Expr) -> Expr {
        if a.is_const(0.0) {
            b
        } else if b.is_const(0.0) {
            a
        } else {
            Expr::Binary(BinOp::Add, Box::new(a), Box::new(b))
        }
    }

    fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_const(0.0) {
            a
        } else if a.is_const(0.0) {
            Expr::Neg(Box::new(b))
        } else {
            Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b))
        }
    }

    fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_const(0.0) || b.is_const(0.0) {
            Expr::Const(0.0)
        } else if a.is_const(1.0) {
            b
        } else if b.is_const(1.0) {
            a
        } else {
            Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
        }
    }

    fn div(a: Expr, b: Expr) -> Expr {
        if a.is_const(0.0) {
            Expr::Const(0.0)
        } else if b.is_const(1.0) {
            a
        } else {
            Expr::Binary(BinOp::Div, Box::new(a), Box::new(b))
        }
    }

    fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Derivative with respect to variable `index`, as a new tree. Only
    /// trivial zero/one folding is applied.
    pub fn derivative(&self, index: usize) -> Expr {
        use Expr::*;
        if !self.uses_var(index) {
            return Const(0.0);
        }
        match self {
            Const(_) => Const(0.0),
            Var(i) => Const(if *i == index { 1.0 } else { 0.0 }),
            Neg(a) => match a.derivative(index) {
                Const(c) => Const(-c),
                d => Neg(Box::new(d)),
            },
            Binary(op, a, b) => {
                let (da, db) = (a.derivative(index), b.derivative(index));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinOp::Div => Expr::sub(
                        Expr::div(da, b.clone()),
                        Expr::div(Expr::mul(a, db), Pow(Box::new(b), 2.0)),
                    ),
                }
            }
            Pow(a, c) => {
                let inner = if *c - 1.0 == 1.0 {
                    (**a).clone()
                } else {
                    Pow(a.clone(), *c - 1.0)
                };
                Expr::mul(Expr::mul(Const(*c), inner), a.derivative(index))
            }
            Call(f, a) => {
                let x = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, x),
                    Func::Cos => Neg(Box::new(Expr::call(Func::Sin, x))),
                    Func::Tan => Expr::div(Const(1.0), Pow(Box::new(Expr::call(Func::Cos, x)), 2.0)),
                    Func::Exp => Expr::call(Func::Exp, x),
                    Func::Log => Expr::div(Const(1.0), x),
                    Func::Sqrt => Expr::div(Const(0.5), Expr::call(Func::Sqrt, x)),
                    Func::Sinh => Expr::call(Func::Cosh, x),
                    Func::Cosh => Expr::call(Func::Sinh, x),
                    Func::Tanh => Expr::div(Const(1.0), Pow(Box::new(Expr::call(Func::Cosh, x)), 2.0)),
                    Func::Abs => Expr::div(x.clone(), Expr::call(Func::Abs, x)),
                };
                Expr::mul(outer, a.derivative(index))
            }
        }
    }

    /// Writes the tree with explicit parentheses so that re-parsing yields
    /// the same tree.
    pub fn write(&self, names: &[alloc::string::String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{:?}", c)
                }
            }
            Expr::Var(i) => f.write_str(&names[*i]),
            Expr::Neg(a) => {
                f.write_str("(-")?;
                a.write(names, f)?;
                f.write_str(")")
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write(names, f)?;
                f.write_str(")")
            }
            Expr::Binary(op, a, b) => {
                f.write_str("(")?;
                a.write(names, f)?;
                write!(f, " {} ", op.symbol())?;
                b.write(names, f)?;
                f.write_str(")")
            }
            Expr::Pow(a, c) => {
                f.write_str("(")?;
                a.write(names, f)?;
                if *c < 0.0 {
                    write!(f, "^(-{:?}))", -c)
                } else {
                    write!(f, "^{:?})", c)
                }
            }
        }
    }
}
