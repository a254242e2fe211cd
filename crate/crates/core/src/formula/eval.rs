use std::collections::BTreeMap;

use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::structure::FiniteStructure;

/// Variable name → element index.
pub type Assignment = BTreeMap<String, usize>;

enum CTerm {
    Slot(usize),
    Elem(usize),
    Apply(usize, Vec<CTerm>),
}

enum CFormula {
    Const(Rational),
    Metric(CTerm, CTerm, usize),
    Rel(usize, Vec<CTerm>),
    Scale(Rational, Box<CFormula>),
    Sum(Box<CFormula>, Box<CFormula>),
    Meet(Box<CFormula>, Box<CFormula>),
    Join(Box<CFormula>, Box<CFormula>),
    Sup(usize, Box<CFormula>),
    Inf(usize, Box<CFormula>),
}

/// A formula resolved against one structure, with variables mapped to slots.
pub struct Evaluator<'s> {
    s: &'s FiniteStructure,
    root: CFormula,
    arity: usize,
    slots: usize,
    /// One table of `d^k` per distinct exponent; `None` where irrational.
    powers: Vec<(u32, Vec<Option<Rational>>)>,
}

struct Compiler<'s> {
    s: &'s FiniteStructure,
    scope: Vec<String>,
    max_slots: usize,
    exponents: Vec<u32>,
}

impl Compiler<'_> {
    fn term(&mut self, t: &Term) -> Result<CTerm> {
        let sig = self.s.signature();
        Ok(match t {
            Term::Var(v) => match self.scope.iter().rposition(|x| x == v) {
                Some(slot) => CTerm::Slot(slot),
                None => return Err(Error::UnassignedVariable(v.clone())),
            },
            Term::Const(c) => {
                let ci = sig
                    .constant_index(c)
                    .ok_or_else(|| Error::Signature(format!("unknown constant `{c}`")))?;
                CTerm::Elem(self.s.constant(ci))
            }
            Term::Apply(f, args) => {
                let fi = sig
                    .function_index(f)
                    .ok_or_else(|| Error::Signature(format!("unknown function `{f}`")))?;
                let args = args
                    .iter()
                    .map(|a| self.term(a))
                    .collect::<Result<Vec<_>>>()?;
                CTerm::Apply(fi, args)
            }
        })
    }

    fn formula(&mut self, f: &Formula) -> Result<CFormula> {
        let sig = self.s.signature();
        Ok(match f {
            Formula::Const(r) => CFormula::Const(r.clone()),
            Formula::Metric(a, b, k) => {
                let slot = match self.exponents.iter().position(|e| e == k) {
                    Some(i) => i,
                    None => {
                        self.exponents.push(*k);
                        self.exponents.len() - 1
                    }
                };
                CFormula::Metric(self.term(a)?, self.term(b)?, slot)
            }
            Formula::Rel(r, args) => {
                let ri = sig
                    .relation_index(r)
                    .ok_or_else(|| Error::Signature(format!("unknown relation `{r}`")))?;
                CFormula::Rel(
                    ri,
                    args.iter()
                        .map(|a| self.term(a))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            Formula::Scale(r, g) => CFormula::Scale(r.clone(), Box::new(self.formula(g)?)),
            Formula::Sum(a, b) => {
                CFormula::Sum(Box::new(self.formula(a)?), Box::new(self.formula(b)?))
            }
            Formula::Meet(a, b) => {
                CFormula::Meet(Box::new(self.formula(a)?), Box::new(self.formula(b)?))
            }
            Formula::Join(a, b) => {
                CFormula::Join(Box::new(self.formula(a)?), Box::new(self.formula(b)?))
            }
            Formula::Sup(v, g) | Formula::Inf(v, g) => {
                let slot = self.scope.len();
                self.scope.push(v.clone());
                self.max_slots = self.max_slots.max(self.scope.len());
                let body = self.formula(g);
                self.scope.pop();
                let body = Box::new(body?);
                if matches!(f, Formula::Sup(..)) {
                    CFormula::Sup(slot, body)
                } else {
                    CFormula::Inf(slot, body)
                }
            }
        })
    }
}

impl<'s> Evaluator<'s> {
    /// Resolves `f` against `s`; `vars` fixes the order of values passed to [`Evaluator::eval`].
    pub fn new(f: &Formula, s: &'s FiniteStructure, vars: &[String]) -> Result<Self> {
        f.check_signature(s.signature())?;
        let mut c = Compiler {
            s,
            scope: vars.to_vec(),
            max_slots: vars.len(),
            exponents: Vec::new(),
        };
        let root = c.formula(f)?;
        let n = s.size();
        let powers = c
            .exponents
            .iter()
            .map(|&k| {
                let table = (0..n * n)
                    .map(|i| s.metric_power(i / n, i % n, k).ok())
                    .collect();
                (k, table)
            })
            .collect();
        Ok(Evaluator {
            s,
            root,
            arity: vars.len(),
            slots: c.max_slots,
            powers,
        })
    }

    pub fn eval(&self, values: &[usize]) -> Result<Rational> {
        if values.len() != self.arity {
            return Err(Error::Domain(format!(
                "expected {} values, got {}",
                self.arity,
                values.len()
            )));
        }
        if values.iter().any(|&v| v >= self.s.size()) {
            return Err(Error::Domain(
                "assigned element outside the universe".into(),
            ));
        }
        let mut env = vec![0usize; self.slots];
        env[..values.len()].copy_from_slice(values);
        self.go(&self.root, &mut env)
    }

    fn term(&self, t: &CTerm, env: &[usize]) -> usize {
        match t {
            CTerm::Slot(i) => env[*i],
            CTerm::Elem(e) => *e,
            CTerm::Apply(f, args) => {
                let n = self.s.size();
                let code = args.iter().fold(0, |acc, a| acc * n + self.term(a, env));
                self.s.function_table(*f)[code]
            }
        }
    }

    fn go(&self, f: &CFormula, env: &mut Vec<usize>) -> Result<Rational> {
        let n = self.s.size();
        Ok(match f {
            CFormula::Const(r) => r.clone(),
            CFormula::Metric(a, b, slot) => {
                let (x, y) = (self.term(a, env), self.term(b, env));
                let (k, table) = &self.powers[*slot];
                match &table[x * n + y] {
                    Some(v) => v.clone(),
                    None => {
                        return Err(Error::Inexact(format!(
                            "d({},{})^{k} is irrational in this structure",
                            self.s.element_name(x),
                            self.s.element_name(y)
                        )))
                    }
                }
            }
            CFormula::Rel(r, args) => {
                let code = args.iter().fold(0, |acc, a| acc * n + self.term(a, env));
                self.s.relation_table(*r)[code].clone()
            }
            CFormula::Scale(r, g) => r * self.go(g, env)?,
            CFormula::Sum(a, b) => self.go(a, env)? + self.go(b, env)?,
            CFormula::Meet(a, b) => std::cmp::min(self.go(a, env)?, self.go(b, env)?),
            CFormula::Join(a, b) => std::cmp::max(self.go(a, env)?, self.go(b, env)?),
            CFormula::Sup(slot, g) | CFormula::Inf(slot, g) => {
                let sup = matches!(f, CFormula::Sup(..));
                let mut best: Option<Rational> = None;
                for e in 0..n {
                    env[*slot] = e;
                    let v = self.go(g, env)?;
                    best = Some(match best {
                        None => v,
                        Some(b) => {
                            if (sup && v > b) || (!sup && v < b) {
                                v
                            } else {
                                b
                            }
                        }
                    });
                }
                best.expect("universe is non-empty")
            }
        })
    }
}

/// Evaluates `f` on `s` under `assignment`. Exact; no rounding anywhere.
pub fn eval(f: &Formula, s: &FiniteStructure, assignment: &Assignment) -> Result<Rational> {
    let vars: Vec<String> = f.free_vars();
    let mut values = Vec::with_capacity(vars.len());
    for v in &vars {
        match assignment.get(v) {
            Some(&e) => values.push(e),
            None => return Err(Error::UnassignedVariable(v.clone())),
        }
    }
    Evaluator::new(f, s, &vars)?.eval(&values)
}

/// Evaluates with values given positionally for `vars`.
pub fn eval_with(
    f: &Formula,
    s: &FiniteStructure,
    vars: &[String],
    values: &[usize],
) -> Result<Rational> {
    Evaluator::new(f, s, vars)?.eval(values)
}
