//! Terms and formulas of continuous logic.
//!
//! Connectives are real constants, `d(t1,t2)^k`, relation atoms, scaling by
//! a rational, `+`, `min`, `max`, `sup` and `inf`. A formula is *p-linear*
//! when it uses neither `min` nor `max` and every metric atom carries
//! exponent `p`.

mod enumerate;
mod eval;
mod gauge;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::signature::Signature;
use crate::structure::PNorm;

pub use enumerate::{enumerate_fragment, enumerate_prenex, FragmentSpec, MaskedAtom};
pub use eval::{eval, eval_with, Assignment, Evaluator};
pub use gauge::{infer_gauge, Gauge};
pub use parser::parse;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    Apply(String, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(Rational),
    Metric(Term, Term, u32),
    Rel(String, Vec<Term>),
    Scale(Rational, Box<Formula>),
    Sum(Box<Formula>, Box<Formula>),
    Meet(Box<Formula>, Box<Formula>),
    Join(Box<Formula>, Box<Formula>),
    Sup(String, Box<Formula>),
    Inf(String, Box<Formula>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.into())
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Const(_) => {}
            Term::Apply(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn rename(&self, from: &str, to: &str) -> Term {
        match self {
            Term::Var(v) if v == from => Term::Var(to.into()),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::Apply(f, args) => {
                Term::Apply(f.clone(), args.iter().map(|a| a.rename(from, to)).collect())
            }
        }
    }

    fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Var(_) => Ok(()),
            Term::Const(c) => match sig.constant_index(c) {
                Some(_) => Ok(()),
                None => Err(Error::Signature(format!("unknown constant `{c}`"))),
            },
            Term::Apply(f, args) => {
                let sym = sig
                    .function(f)
                    .ok_or_else(|| Error::Signature(format!("unknown function `{f}`")))?;
                if sym.arity != args.len() {
                    return Err(Error::Signature(format!(
                        "function `{f}` has arity {}, applied to {} arguments",
                        sym.arity,
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }
}

impl Formula {
    pub fn constant(r: Rational) -> Formula {
        Formula::Const(r)
    }

    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(name.into(), args)
    }

    pub fn metric(a: Term, b: Term, exponent: u32) -> Formula {
        Formula::Metric(a, b, exponent)
    }

    pub fn scale(r: Rational, f: Formula) -> Formula {
        Formula::Scale(r, Box::new(f))
    }

    pub fn sum(a: Formula, b: Formula) -> Formula {
        Formula::Sum(Box::new(a), Box::new(b))
    }

    pub fn meet(a: Formula, b: Formula) -> Formula {
        Formula::Meet(Box::new(a), Box::new(b))
    }

    pub fn join(a: Formula, b: Formula) -> Formula {
        Formula::Join(Box::new(a), Box::new(b))
    }

    pub fn sup(v: &str, f: Formula) -> Formula {
        Formula::Sup(v.into(), Box::new(f))
    }

    pub fn inf(v: &str, f: Formula) -> Formula {
        Formula::Inf(v.into(), Box::new(f))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let push_term = |t: &Term, bound: &Vec<String>, out: &mut Vec<String>| {
            let mut vs = Vec::new();
            t.collect_vars(&mut vs);
            for v in vs {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        match self {
            Formula::Const(_) => {}
            Formula::Metric(a, b, _) => {
                push_term(a, bound, out);
                push_term(b, bound, out);
            }
            Formula::Rel(_, args) => args.iter().for_each(|t| push_term(t, bound, out)),
            Formula::Scale(_, f) => f.collect_free(bound, out),
            Formula::Sum(a, b) | Formula::Meet(a, b) | Formula::Join(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Sup(v, f) | Formula::Inf(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Metric(a, b, _) => {
                let mut vs = Vec::new();
                a.collect_vars(&mut vs);
                b.collect_vars(&mut vs);
                out.extend(vs);
            }
            Formula::Rel(_, args) => {
                let mut vs = Vec::new();
                args.iter().for_each(|t| t.collect_vars(&mut vs));
                out.extend(vs);
            }
            Formula::Sup(v, _) | Formula::Inf(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Scale(_, g) | Formula::Sup(_, g) | Formula::Inf(_, g) => g.visit(f),
            Formula::Sum(a, b) | Formula::Meet(a, b) | Formula::Join(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// `None` when p-linear, otherwise the first reason it is not.
    pub fn linearity_defect(&self, p: PNorm) -> Option<String> {
        let mut defect = None;
        self.visit(&mut |f| {
            if defect.is_some() {
                return;
            }
            match f {
                Formula::Meet(..) => defect = Some(format!("contains min: {f}")),
                Formula::Join(..) => defect = Some(format!("contains max: {f}")),
                Formula::Metric(_, _, k) if *k != p.get() => {
                    defect = Some(format!("metric atom {f} has exponent {k}, expected {p}"))
                }
                _ => {}
            }
        });
        defect
    }

    pub fn is_linear(&self, p: PNorm) -> bool {
        self.linearity_defect(p).is_none()
    }

    pub fn require_linear(&self, p: PNorm) -> Result<()> {
        match self.linearity_defect(p) {
            None => Ok(()),
            Some(reason) => Err(Error::NotLinear { p: p.get(), reason }),
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Metric(..) | Formula::Rel(..) => 0,
            Formula::Scale(_, f) => f.quantifier_depth(),
            Formula::Sum(a, b) | Formula::Meet(a, b) | Formula::Join(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Sup(_, f) | Formula::Inf(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Checks symbol names and arities against a signature.
    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        let mut result = Ok(());
        self.visit(&mut |f| {
            if result.is_err() {
                return;
            }
            result = match f {
                Formula::Metric(a, b, k) => {
                    if *k == 0 {
                        Err(Error::Signature("metric exponent must be positive".into()))
                    } else {
                        a.check(sig).and_then(|_| b.check(sig))
                    }
                }
                Formula::Rel(r, args) => match sig.relation(r) {
                    None => Err(Error::Signature(format!("unknown relation `{r}`"))),
                    Some(sym) if sym.arity != args.len() => Err(Error::Signature(format!(
                        "relation `{r}` has arity {}, applied to {} arguments",
                        sym.arity,
                        args.len()
                    ))),
                    Some(_) => args.iter().try_for_each(|t| t.check(sig)),
                },
                _ => Ok(()),
            };
        });
        result
    }

    /// Capture-avoiding renaming of the free variable `from` to `to`.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        match self {
            Formula::Const(_) => self.clone(),
            Formula::Metric(a, b, k) => Formula::Metric(a.rename(from, to), b.rename(from, to), *k),
            Formula::Rel(r, args) => {
                Formula::Rel(r.clone(), args.iter().map(|t| t.rename(from, to)).collect())
            }
            Formula::Scale(r, f) => Formula::scale(r.clone(), f.rename_free(from, to)),
            Formula::Sum(a, b) => Formula::sum(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Meet(a, b) => Formula::meet(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Join(a, b) => Formula::join(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Sup(v, f) | Formula::Inf(v, f) => {
                let rebuild = |v: &str, body: Formula| match self {
                    Formula::Sup(..) => Formula::sup(v, body),
                    _ => Formula::inf(v, body),
                };
                if v == from {
                    return self.clone();
                }
                if v == to && f.free_vars().iter().any(|x| x == from) {
                    let taken = self.all_vars();
                    let fresh = (0..)
                        .map(|i| format!("{v}_{i}"))
                        .find(|c| !taken.contains(c) && c != to)
                        .expect("fresh name");
                    let body = f.rename_free(v, &fresh).rename_free(from, to);
                    return rebuild(&fresh, body);
                }
                rebuild(v, f.rename_free(from, to))
            }
        }
    }

    /// Left-nested sum of `c·φ` terms; coefficient 1 is written bare.
    pub fn affine(terms: Vec<(Rational, Formula)>) -> Formula {
        let mut iter = terms
            .into_iter()
            .map(|(c, f)| if c.is_one() { f } else { Formula::scale(c, f) });
        let first = iter
            .next()
            .unwrap_or(Formula::Const(Rational::from_integer(0.into())));
        iter.fold(first, Formula::sum)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::Apply(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn is_quantifier(f: &Formula) -> bool {
    matches!(f, Formula::Sup(..) | Formula::Inf(..))
}

struct Operand<'a>(&'a Formula, bool);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Operand(inner, wrap_sums) = *self;
        if is_quantifier(inner) || (wrap_sums && matches!(inner, Formula::Sum(..))) {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(r) => write!(f, "{r}"),
            Formula::Metric(a, b, 1) => write!(f, "d({a},{b})"),
            Formula::Metric(a, b, k) => write!(f, "d({a},{b})^{k}"),
            Formula::Rel(r, args) => {
                write!(f, "{r}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Formula::Scale(r, g) => write!(f, "{r}*{}", Operand(g, true)),
            Formula::Sum(a, b) => write!(f, "{} + {}", Operand(a, false), Operand(b, true)),
            Formula::Meet(a, b) => write!(f, "min({a}, {b})"),
            Formula::Join(a, b) => write!(f, "max({a}, {b})"),
            Formula::Sup(v, g) => write!(f, "sup {v}. {g}"),
            Formula::Inf(v, g) => write!(f, "inf {v}. {g}"),
        }
    }
}
