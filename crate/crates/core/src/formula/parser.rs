//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := ("sup"|"inf") ident "." formula | addexpr
//! addexpr := operand { ("+"|"-") operand }
//! operand := quantified | mulexpr
//! mulexpr := rational ["*" (quantified | mulexpr)] | atom
//! atom    := "d(" term "," term ")" ["^" integer] | ident "(" term {"," term} ")"
//!          | "min(" formula "," formula ")" | "max(" formula "," formula ")" | "(" formula ")"
//! term    := ident | ident "(" term {"," term} ")"
//! ```
//!
//! A quantifier scopes as far right as possible. `*` binds tighter than
//! `+`, and `a - b` is read as `a + -1*b`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};
use crate::signature::{Signature, RESERVED};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Dot,
    Comma,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Tok::Num(text[start..i].parse().expect("digits"))));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'.' => Tok::Dot,
            b',' => Tok::Comma,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Error::Parse {
                    offset: i,
                    message: format!("unexpected character {ch:?}"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    sig: &'a Signature,
}

/// Parses a formula, resolving symbols against `sig`.
///
/// Identifiers that name a constant of the signature are constants; every
/// other bare identifier in term position is a variable.
pub fn parse(text: &str, sig: &Signature) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        sig,
    };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn error(&self, msg: &str) -> Error {
        let found = match self.peek() {
            Some(t) => format!("{t:?}"),
            None => "end of input".into(),
        };
        Error::Parse {
            offset: self.offset(),
            message: format!("{msg} (found {found})"),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn at_quantifier(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == "sup" || s == "inf")
    }

    fn formula(&mut self) -> Result<Formula> {
        if self.at_quantifier() {
            self.quantified()
        } else {
            self.addexpr()
        }
    }

    fn quantified(&mut self) -> Result<Formula> {
        let kw = self.ident()?;
        let var = self.ident()?;
        if RESERVED.contains(&var.as_str()) || self.sig.constant_index(&var).is_some() {
            return Err(self.error(&format!("`{var}` cannot be bound")));
        }
        self.expect(Tok::Dot, "'.' after quantified variable")?;
        let body = self.formula()?;
        Ok(if kw == "sup" {
            Formula::sup(&var, body)
        } else {
            Formula::inf(&var, body)
        })
    }

    fn addexpr(&mut self) -> Result<Formula> {
        let mut acc = self.operand()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = Formula::sum(acc, self.operand()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = Formula::sum(acc, Formula::scale(int(-1), self.operand()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn operand(&mut self) -> Result<Formula> {
        if self.at_quantifier() {
            self.quantified()
        } else {
            self.mulexpr()
        }
    }

    fn rational(&mut self) -> Result<Rational> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let num = match self.bump() {
            Some(Tok::Num(n)) => n,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected number"));
            }
        };
        let den = if self.peek() == Some(&Tok::Slash) {
            self.pos += 1;
            match self.bump() {
                Some(Tok::Num(d)) if !d.is_zero() => d,
                _ => {
                    self.pos -= 1;
                    return Err(self.error("expected nonzero denominator"));
                }
            }
        } else {
            BigInt::from(1)
        };
        let q = Rational::new(num, den);
        Ok(if negative { -q } else { q })
    }

    fn mulexpr(&mut self) -> Result<Formula> {
        let starts_number = match self.peek() {
            Some(Tok::Num(_)) => true,
            Some(Tok::Minus) => matches!(self.peek2(), Some(Tok::Num(_))),
            _ => false,
        };
        if starts_number {
            let r = self.rational()?;
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
                let rhs = if self.at_quantifier() {
                    self.quantified()?
                } else {
                    self.mulexpr()?
                };
                return Ok(Formula::scale(r, rhs));
            }
            return Ok(Formula::Const(r));
        }
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let rhs = if self.at_quantifier() {
                self.quantified()?
            } else {
                self.mulexpr()?
            };
            return Ok(Formula::scale(int(-1), rhs));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::Ident(name)) => {
                let start = self.pos;
                self.pos += 1;
                if self.peek() != Some(&Tok::LParen) {
                    self.pos = start;
                    return Err(self.error(&format!("expected an atom, `{name}` is not a formula")));
                }
                self.pos += 1;
                match name.as_str() {
                    "d" => {
                        let a = self.term()?;
                        self.expect(Tok::Comma, "','")?;
                        let b = self.term()?;
                        self.expect(Tok::RParen, "')'")?;
                        let mut k = 1u32;
                        if self.peek() == Some(&Tok::Caret) {
                            self.pos += 1;
                            k = match self.bump() {
                                Some(Tok::Num(n)) => u32::try_from(&n)
                                    .ok()
                                    .filter(|&k| k > 0)
                                    .ok_or_else(|| Error::Parse {
                                        offset: self.toks[self.pos - 1].0,
                                        message: "metric exponent must be a positive integer"
                                            .into(),
                                    })?,
                                _ => {
                                    self.pos -= 1;
                                    return Err(self.error("expected exponent"));
                                }
                            };
                        }
                        Ok(Formula::metric(a, b, k))
                    }
                    "min" | "max" => {
                        let a = self.formula()?;
                        self.expect(Tok::Comma, "','")?;
                        let b = self.formula()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(if name == "min" {
                            Formula::meet(a, b)
                        } else {
                            Formula::join(a, b)
                        })
                    }
                    _ => {
                        let sym = self.sig.relation(&name).ok_or_else(|| {
                            Error::Signature(format!("unknown relation `{name}`"))
                        })?;
                        let arity = sym.arity;
                        let args = self.term_list()?;
                        if args.len() != arity {
                            return Err(Error::Signature(format!(
                                "relation `{name}` has arity {arity}, applied to {} arguments",
                                args.len()
                            )));
                        }
                        Ok(Formula::Rel(name, args))
                    }
                }
            }
            _ => Err(self.error("expected a formula")),
        }
    }

    /// Parses `t1, ..., tn )` after an opening parenthesis.
    fn term_list(&mut self) -> Result<Vec<Term>> {
        let mut args = vec![self.term()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term> {
        let name = self.ident()?;
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let sym = self
                .sig
                .function(&name)
                .ok_or_else(|| Error::Signature(format!("unknown function `{name}`")))?;
            let arity = sym.arity;
            let args = self.term_list()?;
            if args.len() != arity {
                return Err(Error::Signature(format!(
                    "function `{name}` has arity {arity}, applied to {} arguments",
                    args.len()
                )));
            }
            return Ok(Term::Apply(name, args));
        }
        if self.sig.constant_index(&name).is_some() {
            return Ok(Term::Const(name));
        }
        if RESERVED.contains(&name.as_str())
            || self.sig.relation(&name).is_some()
            || self.sig.function(&name).is_some()
        {
            self.pos -= 1;
            return Err(self.error(&format!("`{name}` cannot be used as a variable")));
        }
        Ok(Term::Var(name))
    }
}
