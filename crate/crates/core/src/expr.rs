//! A small arithmetic expression grammar for configuration files.
//!
//! Expressions range over the variables `x`, `y`, `t` with the operators
//! `+ - * /`, unary minus, parentheses, the functions `sin`, `cos`, `exp`,
//! and numeric literals. Nothing else is accepted; configs stay data, not
//! code.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("unexpected character '{0}' at position {1}")]
    BadChar(char, usize),
    #[error("malformed number at position {0}")]
    BadNumber(usize),
    #[error("unknown identifier '{0}' at position {1}")]
    UnknownIdent(String, usize),
    #[error("expected '{0}' at position {1}")]
    Expected(char, usize),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("trailing input at position {0}")]
    TrailingInput(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    T,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::T => "t",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `src`; the full input must be consumed.
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expression()?;
        match p.peek() {
            None => Ok(e),
            Some(tok) => Err(ExprError::TrailingInput(tok.at)),
        }
    }

    /// Evaluates at the given point. Unused variables are simply ignored.
    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Var(Var::T) => t,
            Expr::Neg(e) => -e.eval(x, y, t),
            Expr::Add(a, b) => a.eval(x, y, t) + b.eval(x, y, t),
            Expr::Sub(a, b) => a.eval(x, y, t) - b.eval(x, y, t),
            Expr::Mul(a, b) => a.eval(x, y, t) * b.eval(x, y, t),
            Expr::Div(a, b) => a.eval(x, y, t) / b.eval(x, y, t),
            Expr::Call(Func::Sin, e) => e.eval(x, y, t).sin(),
            Expr::Call(Func::Cos, e) => e.eval(x, y, t).cos(),
            Expr::Call(Func::Exp, e) => e.eval(x, y, t).exp(),
        }
    }

    /// Collects the variables the expression actually references.
    pub fn vars_used(&self) -> Vec<Var> {
        let mut used = Vec::new();
        self.collect_vars(&mut used);
        used
    }

    fn collect_vars(&self, used: &mut Vec<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !used.contains(v) {
                    used.push(*v);
                }
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(used),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(used);
                b.collect_vars(used);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Call(Func::Sin, e) => write!(f, "sin({e})"),
            Expr::Call(Func::Cos, e) => write!(f, "cos({e})"),
            Expr::Call(Func::Exp, e) => write!(f, "exp({e})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

#[derive(Clone, Debug, PartialEq)]
struct Token {
    kind: TokKind,
    at: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' | '(' | ')' => {
                let kind = match c {
                    '+' => TokKind::Plus,
                    '-' => TokKind::Minus,
                    '*' => TokKind::Star,
                    '/' => TokKind::Slash,
                    '(' => TokKind::LParen,
                    _ => TokKind::RParen,
                };
                out.push(Token { kind, at: i });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // Exponent suffix: 1e-3, 2.5E+4.
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ExprError::BadNumber(start))?;
                out.push(Token {
                    kind: TokKind::Num(value),
                    at: start,
                });
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Token {
                    kind: TokKind::Ident(src[start..i].to_string()),
                    at: start,
                });
            }
            other => return Err(ExprError::BadChar(other, i)),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expression(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokKind::Plus => true,
                TokKind::Minus => false,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        while let Some(tok) = self.peek() {
            let mul = match tok.kind {
                TokKind::Star => true,
                TokKind::Slash => false,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = if mul {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let tok = self.next().ok_or(ExprError::UnexpectedEnd)?;
        match tok.kind {
            TokKind::Num(v) => Ok(Expr::Num(v)),
            TokKind::Minus => Ok(Expr::Neg(Box::new(self.factor()?))),
            TokKind::LParen => {
                let inner = self.expression()?;
                match self.next() {
                    Some(Token {
                        kind: TokKind::RParen,
                        ..
                    }) => Ok(inner),
                    Some(tok) => Err(ExprError::Expected(')', tok.at)),
                    None => Err(ExprError::UnexpectedEnd),
                }
            }
            TokKind::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                "t" => Ok(Expr::Var(Var::T)),
                "sin" | "cos" | "exp" => {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Exp,
                    };
                    match self.next() {
                        Some(Token {
                            kind: TokKind::LParen,
                            ..
                        }) => {}
                        Some(tok) => return Err(ExprError::Expected('(', tok.at)),
                        None => return Err(ExprError::UnexpectedEnd),
                    }
                    let arg = self.expression()?;
                    match self.next() {
                        Some(Token {
                            kind: TokKind::RParen,
                            ..
                        }) => Ok(Expr::Call(func, Box::new(arg))),
                        Some(tok) => Err(ExprError::Expected(')', tok.at)),
                        None => Err(ExprError::UnexpectedEnd),
                    }
                }
                _ => Err(ExprError::UnknownIdent(name, tok.at)),
            },
            TokKind::Plus | TokKind::Star | TokKind::Slash | TokKind::RParen => {
                Err(ExprError::Expected('(', tok.at))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_and_arithmetic() {
        let e = Expr::parse("2 + 3 * 4").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 14.0);
        let e = Expr::parse("(2 + 3) * 4").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 20.0);
        let e = Expr::parse("1e-3 + 2.5E2").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 250.001);
    }

    #[test]
    fn variables_and_functions() {
        let e = Expr::parse("2 + sin(t)").unwrap();
        assert!((e.eval(0.0, 0.0, 1.5) - (2.0 + 1.5_f64.sin())).abs() < 1e-15);
        let e = Expr::parse("exp(-x * x - y)").unwrap();
        assert!((e.eval(2.0, 1.0, 0.0) - (-5.0_f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn unary_minus_binds_tighter_than_mul_chain() {
        let e = Expr::parse("-x * 3").unwrap();
        assert_eq!(e.eval(2.0, 0.0, 0.0), -6.0);
        let e = Expr::parse("4 - -2").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 6.0);
    }

    #[test]
    fn reports_vars_used() {
        let e = Expr::parse("2 * cos(t) + x").unwrap();
        let used = e.vars_used();
        assert!(used.contains(&Var::T) && used.contains(&Var::X));
        assert!(!used.contains(&Var::Y));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(Expr::parse("2 +").is_err());
        assert!(Expr::parse("sin 3").is_err());
        assert!(Expr::parse("foo(2)").is_err());
        assert!(Expr::parse("2 ^ 3").is_err());
        assert!(Expr::parse("(1 + 2").is_err());
        assert!(Expr::parse("1 2").is_err());
    }
}
