use std::fmt;

use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Abs,
    Sqrt,
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            _ => return None,
        })
    }
}

/// Expression tree. Variables are zero-based (`Var(0)` prints as `x1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, o: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(o))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl Expr {
    pub fn c(v: f64) -> Self {
        if v < 0.0 {
            Expr::Neg(Box::new(Expr::Const(-v)))
        } else {
            Expr::Const(v)
        }
    }

    pub fn var(i: usize) -> Self {
        Expr::Var(i)
    }

    pub fn pow(self, n: i32) -> Self {
        Expr::Pow(Box::new(self), n)
    }

    pub fn call(f: Func, arg: Expr) -> Self {
        Expr::Call(f, Box::new(arg))
    }

    /// Largest variable index referenced, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    /// Renumbers every variable through `map`.
    pub fn map_vars(&self, map: &impl Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(i) => Expr::Var(map(*i)),
            Expr::Neg(a) => Expr::Neg(Box::new(a.map_vars(map))),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.map_vars(map)), *n),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.map_vars(map))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.map_vars(map)), Box::new(b.map_vars(map))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.map_vars(map)), Box::new(b.map_vars(map))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.map_vars(map)), Box::new(b.map_vars(map))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.map_vars(map)), Box::new(b.map_vars(map))),
        }
    }

    /// Replaces `Var(i)` by `vars[i]`.
    pub fn substitute(&self, vars: &[Expr]) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Var(i) => vars[*i].clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(vars))),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.substitute(vars)), *n),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(vars))),
            Expr::Add(a, b) => {
                Expr::Add(Box::new(a.substitute(vars)), Box::new(b.substitute(vars)))
            }
            Expr::Sub(a, b) => {
                Expr::Sub(Box::new(a.substitute(vars)), Box::new(b.substitute(vars)))
            }
            Expr::Mul(a, b) => {
                Expr::Mul(Box::new(a.substitute(vars)), Box::new(b.substitute(vars)))
            }
            Expr::Div(a, b) => {
                Expr::Div(Box::new(a.substitute(vars)), Box::new(b.substitute(vars)))
            }
        }
    }

    /// Evaluates over any scalar type. Fails on `sqrt` of a negative, division by zero,
    /// and (for differentiating scalars) at the kinks of `abs` and `sqrt`.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S> {
        Ok(match self {
            Expr::Const(v) => S::constant(*v),
            Expr::Var(i) => *vars
                .get(*i)
                .ok_or_else(|| Error::Precondition(format!("variable x{} not bound", i + 1)))?,
            Expr::Neg(a) => -a.eval(vars)?,
            Expr::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Expr::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Expr::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Expr::Div(a, b) => {
                let den = b.eval(vars)?;
                if den.value() == 0.0 {
                    return Err(Error::Numeric("division by zero".into()));
                }
                a.eval(vars)? / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(vars)?;
                if *n < 0 && base.value() == 0.0 {
                    return Err(Error::Numeric("negative power of zero".into()));
                }
                base.powi(*n)
            }
            Expr::Call(f, a) => {
                let arg = a.eval(vars)?;
                match f {
                    Func::Abs => arg.abs()?,
                    Func::Sqrt => arg.sqrt()?,
                    Func::Sin => arg.sin(),
                    Func::Cos => arg.cos(),
                    Func::Exp => arg.exp(),
                }
            }
        })
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // `{}` on f64 is the shortest string that parses back to the same value.
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{v}")
    }
}

/// Fully parenthesised rendering; parsing it back gives an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write_number(f, *v),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed vector field definition: one expression per output component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldAst {
    pub input_dim: usize,
    pub output_dim: usize,
    pub exprs: Vec<Expr>,
}

impl FieldAst {
    pub fn new(input_dim: usize, exprs: Vec<Expr>) -> Result<Self> {
        if input_dim == 0 || exprs.is_empty() {
            return Err(Error::Precondition(
                "field dimensions must be positive".into(),
            ));
        }
        if let Some(bad) = exprs.iter().map(Expr::arity).find(|&a| a > input_dim) {
            return Err(Error::UnknownIdentifier {
                name: format!("x{bad}"),
                offset: 0,
            });
        }
        Ok(Self {
            input_dim,
            output_dim: exprs.len(),
            exprs,
        })
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        self.exprs.iter().map(|e| e.eval(x)).collect()
    }
}

impl fmt::Display for FieldAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exprs.iter().enumerate() {
            if i > 0 {
                write!(f, " ; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}
