//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | base ("^" integer)?
//! base   := number | "z" | "k" | "i" | "(" expr ")" | func "(" expr ")"
//! func   := "exp" | "sin" | "cos"
//! ```
//!
//! Numbers are decimal literals with an optional exponent and an optional
//! `i` suffix marking them imaginary.

use num_complex::Complex64;

use super::build;
use super::Node;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Complex64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent, only when followed by digits
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                let imaginary = i < bytes.len()
                    && bytes[i] == b'i'
                    && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric());
                if imaginary {
                    i += 1;
                    out.push((Tok::Num(Complex64::new(0.0, value)), start));
                } else {
                    out.push((Tok::Num(Complex64::new(value, 0.0)), start));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let c = src[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{c}`"),
                });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, p)| p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let at = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(Error::Syntax {
                pos: at,
                msg: format!("expected {what}, found {t:?}"),
            }),
            None => Err(Error::Syntax {
                pos: at,
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            let inner = self.factor()?;
            return Ok(build::neg_literal(inner));
        }
        let base = self.base()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let n = self.integer()?;
            return Ok(Node::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        let negative = if let Some(Tok::Minus) = self.peek() {
            self.bump();
            true
        } else {
            false
        };
        let (wrapped, body_at) = if let Some(Tok::LParen) = self.peek() {
            self.bump();
            (true, self.offset())
        } else {
            (false, self.offset())
        };
        let inner_negative = if wrapped {
            if let Some(Tok::Minus) = self.peek() {
                self.bump();
                true
            } else {
                false
            }
        } else {
            false
        };
        let value = match self.bump() {
            Some(Tok::Num(c)) if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= i32::MAX as f64 => {
                c.re as i32
            }
            _ => {
                return Err(Error::Syntax {
                    pos: body_at,
                    msg: "exponent must be an integer literal".into(),
                })
            }
        };
        if wrapped {
            self.expect(Tok::RParen, "`)`")?;
        }
        let sign = if negative ^ inner_negative { -1 } else { 1 };
        Ok(sign * value)
    }

    fn base(&mut self) -> Result<Node> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(c)) => Ok(Node::Const(c)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "z" => Ok(Node::Z),
                "k" => Ok(Node::K),
                "i" => Ok(Node::Const(Complex64::new(0.0, 1.0))),
                "exp" | "sin" | "cos" => {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = Box::new(self.expr()?);
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(match name.as_str() {
                        "exp" => Node::Exp(arg),
                        "sin" => Node::Sin(arg),
                        _ => Node::Cos(arg),
                    })
                }
                _ => Err(Error::UnknownIdentifier { name, pos: at }),
            },
            Some(t) => Err(Error::Syntax {
                pos: at,
                msg: format!("unexpected token {t:?}"),
            }),
            None => Err(Error::Syntax {
                pos: at,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

pub(super) fn parse(src: &str) -> Result<Node> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let node = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(Error::Syntax {
            pos: p.offset(),
            msg: "trailing input".into(),
        });
    }
    Ok(node)
}
