//! Expression tree for matrix/vector entries: arithmetic over state
//! variables with a fixed function vocabulary. Printing is precedence-aware
//! and preserves the exact tree on reparse (including association order), so
//! printed-and-reparsed expressions evaluate bit-identically.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::fmt;

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

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Exp,
    Tanh,
    Sqrt,
    Abs,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Tanh => "tanh",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "exp" => UnaryFn::Exp,
            "tanh" => UnaryFn::Tanh,
            "sqrt" => UnaryFn::Sqrt,
            "abs" => UnaryFn::Abs,
            _ => return None,
        })
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            UnaryFn::Sin => x.sin(),
            UnaryFn::Cos => x.cos(),
            UnaryFn::Exp => x.exp(),
            UnaryFn::Tanh => x.tanh(),
            UnaryFn::Sqrt => x.sqrt(),
            UnaryFn::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expression<T> {
    Constant(T),
    /// Zero-based component index; prints as `u{index+1}` (or a custom name).
    Variable(usize),
    Neg(Box<Expression<T>>),
    Call(UnaryFn, Box<Expression<T>>),
    Binary(BinOp, Box<Expression<T>>, Box<Expression<T>>),
    /// Base raised to a constant exponent.
    Power(Box<Expression<T>>, T),
}

impl<T: Real> Expression<T> {
    pub fn constant(v: f64) -> Self {
        Expression::Constant(T::lit(v))
    }

    pub fn variable(index: usize) -> Self {
        Expression::Variable(index)
    }

    /// Largest variable index used, if any variable appears.
    pub fn max_variable(&self) -> Option<usize> {
        match self {
            Expression::Constant(_) => None,
            Expression::Variable(k) => Some(*k),
            Expression::Neg(e) | Expression::Call(_, e) | Expression::Power(e, _) => {
                e.max_variable()
            }
            Expression::Binary(_, a, b) => match (a.max_variable(), b.max_variable()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    /// True when no state variable appears anywhere in the tree.
    pub fn is_constant(&self) -> bool {
        self.max_variable().is_none()
    }

    /// Evaluates the tree at state `u`. The innermost node producing a
    /// non-finite value is reported in the error.
    pub fn eval(&self, u: &[T]) -> Result<T> {
        let v = match self {
            Expression::Constant(c) => *c,
            Expression::Variable(k) => u[*k],
            Expression::Neg(e) => -e.eval(u)?,
            Expression::Call(f, e) => f.apply(e.eval(u)?),
            Expression::Binary(op, a, b) => {
                let x = a.eval(u)?;
                let y = b.eval(u)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                }
            }
            Expression::Power(base, exp) => {
                let x = base.eval(u)?;
                pow_const(x, *exp)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                expr: self.to_string(),
                state: u.iter().map(|x| x.as_f64()).collect(),
            })
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Binary(op, ..) => op.precedence(),
            Expression::Power(..) => 3,
            Expression::Neg(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min_prec;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expression::Constant(c) => write!(f, "{c}")?,
            Expression::Variable(k) => write!(f, "u{}", k + 1)?,
            Expression::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 4)?;
            }
            Expression::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Expression::Binary(op, a, b) => {
                // Equal precedence on the right forces parentheses so the
                // association order survives the round trip.
                a.fmt_prec(f, prec)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, prec + 1)?;
            }
            Expression::Power(base, exp) => {
                base.fmt_prec(f, 5)?;
                if *exp < T::zero() {
                    write!(f, "^({exp})")?;
                } else {
                    write!(f, "^{exp}")?;
                }
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Power with a constant exponent: integral exponents use repeated-squaring
/// `powi` so small integer powers of negative bases stay exact.
fn pow_const<T: Real>(base: T, exp: T) -> T {
    let truncated = exp.trunc();
    if exp == truncated && truncated.abs() <= T::lit(65536.0) {
        base.powi(truncated.to_i32().unwrap())
    } else {
        base.powf(exp)
    }
}

impl<T: Real> fmt::Display for Expression<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_direct_arithmetic() {
        // u1*u2 at (0.5, 2) = 1
        let e: Expression<f64> = Expression::Binary(
            BinOp::Mul,
            Box::new(Expression::variable(0)),
            Box::new(Expression::variable(1)),
        );
        assert_eq!(e.eval(&[0.5, 2.0]).unwrap(), 1.0);
    }

    #[test]
    fn non_finite_reports_innermost_subexpression() {
        // (1 + 1/u1) at u1 = 0: the offending node is the division.
        let div: Expression<f64> = Expression::Binary(
            BinOp::Div,
            Box::new(Expression::constant(1.0)),
            Box::new(Expression::variable(0)),
        );
        let e = Expression::Binary(
            BinOp::Add,
            Box::new(Expression::constant(1.0)),
            Box::new(div),
        );
        match e.eval(&[0.0]) {
            Err(Error::NonFinite { expr, .. }) => assert_eq!(expr, "1 / u1"),
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn integer_power_of_negative_base_is_exact() {
        let e: Expression<f64> =
            Expression::Power(Box::new(Expression::variable(0)), 3.0);
        assert_eq!(e.eval(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn fractional_power_of_negative_base_errors() {
        let e: Expression<f64> =
            Expression::Power(Box::new(Expression::variable(0)), 0.5);
        assert!(e.eval(&[-1.0]).is_err());
    }
}
