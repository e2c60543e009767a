//! Recursive-descent parser for the field language.
//!
//! ```text
//! field  := expr (";" expr)*
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := base ("^" "-"? int)?
//! base   := number | var | fn "(" expr ")" | "(" expr ")"
//! var    := "x" int            (1-based)
//! fn     := "abs" | "sqrt" | "sin" | "cos" | "exp"
//! ```
//!
//! Power binds tighter than unary minus, so `-x1^2` is `-(x1^2)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::ast::{Expr, FieldAst, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    End,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, start));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let mut integral = true;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                integral = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
            out.push((Tok::Num(v, integral), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(syntax(start, format!("unexpected character `{ch}`")));
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    input_dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
    }

    fn field(&mut self) -> Result<Vec<Expr>> {
        let mut exprs = vec![self.expr()?];
        while *self.peek() == Tok::Semi {
            self.bump();
            exprs.push(self.expr()?);
        }
        if *self.peek() != Tok::End {
            return Err(syntax(self.offset(), "unexpected trailing input"));
        }
        Ok(exprs)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs.add(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs.sub(self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = lhs.mul(self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs.div(self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let at = self.offset();
        match self.bump().0 {
            Tok::Num(v, true) if v <= i32::MAX as f64 => {
                let n = v as i32;
                Ok(base.pow(if negative { -n } else { n }))
            }
            _ => Err(syntax(at, "exponent must be an integer literal")),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v, _) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::call(f, arg));
                }
                let index = name
                    .strip_prefix('x')
                    .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok());
                match index {
                    Some(k) if k >= 1 && k <= self.input_dim => Ok(Expr::Var(k - 1)),
                    _ => Err(Error::UnknownIdentifier { name, offset: at }),
                }
            }
            Tok::End => Err(syntax(at, "unexpected end of input")),
            other => Err(syntax(at, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses `src` into a field with `input_dim` variables and `output_dim` components.
pub fn parse_field(src: &str, input_dim: usize, output_dim: usize) -> Result<FieldAst> {
    if input_dim == 0 || output_dim == 0 {
        return Err(Error::Precondition(
            "field dimensions must be positive".into(),
        ));
    }
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        input_dim,
    };
    let exprs = p.field()?;
    if exprs.len() != output_dim {
        return Err(Error::Arity {
            expected: output_dim,
            found: exprs.len(),
        });
    }
    FieldAst::new(input_dim, exprs)
}

/// Parses a single scalar expression over `input_dim` variables.
pub fn parse_expr(src: &str, input_dim: usize) -> Result<Expr> {
    Ok(parse_field(src, input_dim, 1)?.exprs.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> Expr {
        Expr::Var(i)
    }

    #[test]
    fn squares_in_real_coordinates() {
        let ast = parse_field("x1^2 - x2^2 ; 2*x1*x2", 2, 2).unwrap();
        assert_eq!(ast.exprs[0], v(0).pow(2).sub(v(1).pow(2)));
        assert_eq!(ast.exprs[1], Expr::Const(2.0).mul(v(0)).mul(v(1)));
    }

    #[test]
    fn identity() {
        let ast = parse_field("x1 ; x2", 2, 2).unwrap();
        assert_eq!(ast.exprs, vec![v(0), v(1)]);
    }

    #[test]
    fn cubic_fold() {
        let ast = parse_field("x1^3 + x2*x1 ; x2", 2, 2).unwrap();
        assert_eq!(ast.exprs[0], v(0).pow(3).add(v(1).mul(v(0))));
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        let e = parse_expr("-x1^2", 1).unwrap();
        assert_eq!(e, v(0).pow(2).neg());
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
        assert_eq!(
            parse_expr("2*-x1", 1).unwrap(),
            Expr::Const(2.0).mul(v(0).neg())
        );
        assert_eq!(parse_expr("x1^-2", 1).unwrap(), v(0).pow(-2));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("1 - 2 - 3 * 4 / 2", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 1.0 - 2.0 - 3.0 * 4.0 / 2.0);
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(
            parse_field("x1^2-x2;sin( x1 )", 2, 2).unwrap(),
            parse_field("  x1 ^ 2 -  x2 ;\n sin(x1)", 2, 2).unwrap()
        );
    }

    #[test]
    fn scientific_numbers() {
        assert_eq!(parse_expr("1.5e-3", 1).unwrap(), Expr::Const(1.5e-3));
        assert_eq!(parse_expr(".25", 1).unwrap(), Expr::Const(0.25));
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(
            parse_field("x1 + ", 1, 1).unwrap_err(),
            Error::Syntax {
                offset: 5,
                message: "unexpected end of input".into()
            }
        );
        match parse_field("x1 $ 2", 1, 1).unwrap_err() {
            Error::Syntax { offset, .. } => assert_eq!(offset, 3),
            e => panic!("{e:?}"),
        }
        match parse_field("x1^1.5", 1, 1).unwrap_err() {
            Error::Syntax { offset, .. } => assert_eq!(offset, 3),
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_field("(x1", 1, 1),
            Err(Error::Syntax { offset: 3, .. })
        ));
    }

    #[test]
    fn arity_mismatch() {
        assert_eq!(
            parse_field("x1 ; x2", 2, 3).unwrap_err(),
            Error::Arity {
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn unknown_identifiers() {
        assert!(matches!(
            parse_field("x1 + y", 2, 1),
            Err(Error::UnknownIdentifier { offset: 5, .. })
        ));
        assert!(matches!(
            parse_field("x3", 2, 1),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_field("x0", 2, 1),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_field("tan(x1)", 2, 1),
            Err(Error::UnknownIdentifier { .. })
        ));
    }
}
