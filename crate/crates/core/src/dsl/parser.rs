//! Recursive-descent parser for the expression grammar.
//!
//! Precedence, tightest first: unary minus, power (constant exponent),
//! multiplication/division, addition/subtraction. `-u1^2` therefore parses
//! as `(-u1)^2`.

use super::ast::{BinOp, Expression, UnaryFn};
use super::lexer::{syntax_error, tokenize, Spanned, Token};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which variable names the expression may reference.
#[derive(Debug, Clone)]
pub enum VarSpec {
    /// State variables `u1..=un`.
    State(usize),
    /// Explicitly named scalars, e.g. `["x"]`; index = list position.
    Named(Vec<String>),
}

impl VarSpec {
    fn resolve(&self, name: &str) -> std::result::Result<usize, VarError> {
        match self {
            VarSpec::State(n) => {
                let digits = match name.strip_prefix('u') {
                    Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) => d,
                    _ => return Err(VarError::Unknown),
                };
                let k: usize = digits.parse().map_err(|_| VarError::Unknown)?;
                if k == 0 || k > *n {
                    Err(VarError::OutOfRange)
                } else {
                    Ok(k - 1)
                }
            }
            VarSpec::Named(names) => names
                .iter()
                .position(|c| c == name)
                .ok_or(VarError::Unknown),
        }
    }

    fn n(&self) -> usize {
        match self {
            VarSpec::State(n) => *n,
            VarSpec::Named(names) => names.len(),
        }
    }
}

enum VarError {
    Unknown,
    OutOfRange,
}

pub fn parse_expression<T: Real>(src: &str, vars: &VarSpec) -> Result<Expression<T>> {
    let tokens = tokenize(src)?;
    let mut p = Parser { src, tokens, pos: 0, vars };
    let expr = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(syntax_error(src, t.offset, "unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Spanned>,
    pos: usize,
    vars: &'a VarSpec,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eof_offset(&self) -> usize {
        self.src.len()
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.next() {
            Some(Spanned { token: Token::RParen, .. }) => Ok(()),
            Some(t) => Err(syntax_error(self.src, t.offset, "expected `)`")),
            None => Err(syntax_error(self.src, self.eof_offset(), "expected `)`, found end")),
        }
    }

    fn expr<T: Real>(&mut self) -> Result<Expression<T>> {
        let mut lhs = self.term()?;
        while let Some(t) = self.peek() {
            let op = match t.token {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term<T: Real>(&mut self) -> Result<Expression<T>> {
        let mut lhs = self.power()?;
        while let Some(t) = self.peek() {
            let op = match t.token {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.power()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn power<T: Real>(&mut self) -> Result<Expression<T>> {
        let base = self.signed_atom()?;
        if let Some(Spanned { token: Token::Caret, offset }) = self.peek().cloned() {
            self.pos += 1;
            let exp = self.exponent(offset)?;
            return Ok(Expression::Power(Box::new(base), exp));
        }
        Ok(base)
    }

    /// Constant exponent: a signed number, or a parenthesized constant
    /// expression (for rationals like `(1/3)`).
    fn exponent<T: Real>(&mut self, caret_offset: usize) -> Result<T> {
        match self.peek().cloned() {
            Some(Spanned { token: Token::Number(v), .. }) => {
                self.pos += 1;
                Ok(T::lit(v))
            }
            Some(Spanned { token: Token::Minus, .. }) => {
                self.pos += 1;
                match self.next() {
                    Some(Spanned { token: Token::Number(v), .. }) => Ok(T::lit(-v)),
                    _ => Err(syntax_error(
                        self.src,
                        caret_offset,
                        "exponent must be a constant",
                    )),
                }
            }
            Some(Spanned { token: Token::LParen, .. }) => {
                self.pos += 1;
                let inner: Expression<T> = self.expr()?;
                self.expect_rparen()?;
                if !inner.is_constant() {
                    return Err(syntax_error(
                        self.src,
                        caret_offset,
                        "exponent must be a constant (no state variables)",
                    ));
                }
                inner.eval(&[]).map_err(|_| {
                    syntax_error(self.src, caret_offset, "exponent is not a finite constant")
                })
            }
            _ => Err(syntax_error(self.src, caret_offset, "exponent must be a constant")),
        }
    }

    fn signed_atom<T: Real>(&mut self) -> Result<Expression<T>> {
        if let Some(Spanned { token: Token::Minus, .. }) = self.peek() {
            self.pos += 1;
            let inner = self.signed_atom()?;
            return Ok(Expression::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom<T: Real>(&mut self) -> Result<Expression<T>> {
        match self.next() {
            Some(Spanned { token: Token::Number(v), .. }) => Ok(Expression::Constant(T::lit(v))),
            Some(Spanned { token: Token::LParen, .. }) => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Spanned { token: Token::Ident(name), offset }) => {
                if let Some(func) = UnaryFn::from_name(&name) {
                    match self.next() {
                        Some(Spanned { token: Token::LParen, .. }) => {
                            let arg = self.expr()?;
                            self.expect_rparen()?;
                            Ok(Expression::Call(func, Box::new(arg)))
                        }
                        _ => Err(syntax_error(
                            self.src,
                            offset,
                            format!("function `{name}` needs a parenthesized argument"),
                        )),
                    }
                } else if let Some(Spanned { token: Token::LParen, .. }) = self.peek() {
                    Err(syntax_error(self.src, offset, format!("unknown function `{name}`")))
                } else {
                    match self.vars.resolve(&name) {
                        Ok(index) => Ok(Expression::Variable(index)),
                        Err(VarError::OutOfRange) => Err(Error::VariableOutOfRange {
                            name,
                            n: self.vars.n(),
                        }),
                        Err(VarError::Unknown) => Err(syntax_error(
                            self.src,
                            offset,
                            format!("unknown identifier `{name}`"),
                        )),
                    }
                }
            }
            Some(t) => Err(syntax_error(self.src, t.offset, "expected a value")),
            None => Err(syntax_error(self.src, self.eof_offset(), "unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Expression<f64> {
        parse_expression(src, &VarSpec::State(3)).unwrap()
    }

    #[test]
    fn precedence_mul_over_add() {
        let e = parse("1 + 2 * u1");
        assert_eq!(e.eval(&[4.0, 0.0, 0.0]).unwrap(), 9.0);
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        // -2^2 = (-2)^2 = 4 under this grammar.
        let e = parse("-2 ^ 2");
        assert_eq!(e.eval(&[0.0; 3]).unwrap(), 4.0);
    }

    #[test]
    fn power_binds_tighter_than_mul() {
        let e = parse("3 * u1^2");
        assert_eq!(e.eval(&[2.0, 0.0, 0.0]).unwrap(), 12.0);
    }

    #[test]
    fn parenthesized_rational_exponent() {
        let e = parse("u1^(1/2)");
        assert_eq!(e.eval(&[9.0, 0.0, 0.0]).unwrap(), 3.0);
    }

    #[test]
    fn nonconstant_exponent_rejected() {
        let err = parse_expression::<f64>("2^u1", &VarSpec::State(1)).unwrap_err();
        assert!(err.to_string().contains("constant"), "{err}");
    }

    #[test]
    fn chained_power_rejected() {
        assert!(parse_expression::<f64>("u1^2^3", &VarSpec::State(1)).is_err());
    }

    #[test]
    fn out_of_range_variable() {
        let err = parse_expression::<f64>("u3 + 1", &VarSpec::State(2)).unwrap_err();
        match err {
            Error::VariableOutOfRange { name, n } => {
                assert_eq!(name, "u3");
                assert_eq!(n, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_function_reported_with_position() {
        let err = parse_expression::<f64>("1 + foo(u1)", &VarSpec::State(1)).unwrap_err();
        match err {
            Error::Parse { col, ref msg, .. } => {
                assert_eq!(col, 5);
                assert!(msg.contains("foo"));
            }
            ref other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn named_variables() {
        // Unary minus binds tighter than power, so -x^2 is (-x)^2 here.
        let e: Expression<f64> =
            parse_expression("-x * exp(-x^2)", &VarSpec::Named(vec!["x".into()])).unwrap();
        let v = e.eval(&[0.5]).unwrap();
        assert!((v - (-0.5 * (0.25f64).exp())).abs() < 1e-15);

        let e: Expression<f64> =
            parse_expression("-x * exp(-(x^2))", &VarSpec::Named(vec!["x".into()])).unwrap();
        let v = e.eval(&[0.5]).unwrap();
        assert!((v - (-0.5 * (-0.25f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn function_names_are_not_variables() {
        assert!(parse_expression::<f64>("sin + 1", &VarSpec::State(1)).is_err());
    }

    #[test]
    fn two_digit_indices() {
        let e = parse_expression::<f64>("u10", &VarSpec::State(10));
        assert!(e.is_ok());
    }
}
