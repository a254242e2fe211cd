//! Continuous signatures and moduli of uniform continuity.
//!
//! A [`Modulus`] is a finite minimum of nondecreasing affine maps
//! `t ↦ slope·t + intercept`. Such a minimum is nondecreasing and concave,
//! and since at least one piece passes through the origin it vanishes at 0.
//! Subadditivity follows from concavity together with `λ(0) = 0`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::{self, Rational};

/// The name of the implicit metric symbol.
pub const METRIC_SYMBOL: &str = "d";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Piece {
    pub slope: Rational,
    pub intercept: Rational,
}

impl Piece {
    pub fn new(slope: Rational, intercept: Rational) -> Self {
        Piece { slope, intercept }
    }

    fn at(&self, t: &Rational) -> Rational {
        &self.slope * t + &self.intercept
    }

    fn dominates(&self, other: &Piece) -> bool {
        self.slope >= other.slope && self.intercept >= other.intercept
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    pieces: Vec<Piece>,
}

impl Modulus {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return domain("modulus needs at least one piece");
        }
        if pieces
            .iter()
            .any(|p| p.slope.is_negative() || p.intercept.is_negative())
        {
            return domain("modulus slopes and intercepts must be nonnegative");
        }
        if !pieces.iter().any(|p| p.intercept.is_zero()) {
            return domain("modulus needs a piece with zero intercept so that λ(0) = 0");
        }
        Ok(Self::normalized(pieces))
    }

    /// Drops pieces that can never attain the minimum and sorts the rest.
    fn normalized(mut pieces: Vec<Piece>) -> Self {
        pieces.sort_by(|a, b| (&a.slope, &a.intercept).cmp(&(&b.slope, &b.intercept)));
        pieces.dedup();
        let mut kept: Vec<Piece> = Vec::with_capacity(pieces.len());
        for (i, p) in pieces.iter().enumerate() {
            let dominated = pieces
                .iter()
                .enumerate()
                .any(|(j, q)| i != j && p.dominates(q));
            if !dominated {
                kept.push(p.clone());
            }
        }
        Modulus { pieces: kept }
    }

    pub fn identity() -> Self {
        Self::linear(Rational::one())
    }

    pub fn zero() -> Self {
        Self::linear(Rational::zero())
    }

    pub fn linear(slope: Rational) -> Self {
        Modulus {
            pieces: vec![Piece::new(slope, Rational::zero())],
        }
    }

    /// `t ↦ min(slope·t, cap)`.
    pub fn capped(slope: Rational, cap: Rational) -> Result<Self> {
        Self::new(vec![
            Piece::new(slope, Rational::zero()),
            Piece::new(Rational::zero(), cap),
        ])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        if t.is_negative() {
            return domain(format!("modulus argument {t} is negative"));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: &Rational) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.at(t))
            .min()
            .expect("modulus has pieces")
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| rational::to_f64(&p.slope) * t + rational::to_f64(&p.intercept))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scale(&self, r: &Rational) -> Result<Self> {
        if !r.is_positive() {
            return domain(format!("modulus scale factor {r} must be positive"));
        }
        Ok(self.scale_nonneg(r))
    }

    pub(crate) fn scale_nonneg(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Modulus {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece::new(&p.slope * r, &p.intercept * r))
                .collect(),
        }
    }

    /// Pointwise sum: the minimum over all pairs of pieces of their sum.
    pub fn sum(&self, other: &Modulus) -> Self {
        let mut pieces = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for a in &self.pieces {
            for b in &other.pieces {
                pieces.push(Piece::new(&a.slope + &b.slope, &a.intercept + &b.intercept));
            }
        }
        Self::normalized(pieces)
    }

    /// An upper bound of the pointwise maximum. Returns the sum, which
    /// dominates both arguments because both are nonnegative.
    pub fn max(&self, other: &Modulus) -> Self {
        self.sum(other)
    }

    /// `t ↦ self(inner(t))`. Stays a minimum of affine pieces because the
    /// outer slopes are nonnegative.
    pub fn compose(&self, inner: &Modulus) -> Self {
        let mut pieces = Vec::with_capacity(self.pieces.len() * inner.pieces.len());
        for outer in &self.pieces {
            for i in &inner.pieces {
                pieces.push(Piece::new(
                    &outer.slope * &i.slope,
                    &outer.slope * &i.intercept + &outer.intercept,
                ));
            }
        }
        Self::normalized(pieces)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces
            .iter()
            .any(|p| p.slope.is_zero() && p.intercept.is_zero())
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "min(")?;
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}·t + {}", p.slope, p.intercept)?;
        }
        write!(f, ")")
    }
}

impl Serialize for Modulus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[String; 2]> = self
            .pieces
            .iter()
            .map(|p| [rational::format(&p.slope), rational::format(&p.intercept)])
            .collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Modulus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let pairs = Vec::<[String; 2]>::deserialize(d)?;
        let pieces = pairs
            .iter()
            .map(|[s, i]| Ok(Piece::new(rational::parse(s)?, rational::parse(i)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Modulus::new(pieces).map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Combine {
    Scale(Rational),
    Sum,
    Max,
}

/// Folds `args` with the chosen combinator. `Scale` takes exactly one argument.
pub fn modulus_combine(kind: &Combine, args: &[Modulus]) -> Result<Modulus> {
    match kind {
        Combine::Scale(r) => match args {
            [m] => m.scale(r),
            _ => domain("scale takes exactly one modulus"),
        },
        Combine::Sum | Combine::Max => {
            let (first, rest) = args
                .split_first()
                .ok_or_else(|| Error::Domain("no moduli to combine".into()))?;
            Ok(rest.iter().fold(first.clone(), |acc, m| {
                if *kind == Combine::Sum {
                    acc.sum(m)
                } else {
                    acc.max(m)
                }
            }))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSymbol {
    pub name: String,
    pub arity: usize,
    pub modulus: Modulus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub bound: Rational,
    pub modulus: Modulus,
}

/// A continuous signature. The metric symbol `d` is implicit, binary, and
/// bounded by 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Signature {
    #[serde(default)]
    pub constants: Vec<String>,
    #[serde(default)]
    pub functions: Vec<FunctionSymbol>,
    #[serde(default)]
    pub relations: Vec<RelationSymbol>,
}

#[derive(Deserialize)]
struct RawSignature {
    #[serde(default)]
    constants: Vec<String>,
    #[serde(default)]
    functions: Vec<FunctionSymbol>,
    #[serde(default)]
    relations: Vec<RelationSymbol>,
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawSignature::deserialize(d)?;
        Signature::new(raw.constants, raw.functions, raw.relations).map_err(D::Error::custom)
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

pub(crate) const RESERVED: [&str; 5] = ["d", "sup", "inf", "min", "max"];

impl Signature {
    pub fn new(
        constants: Vec<String>,
        functions: Vec<FunctionSymbol>,
        relations: Vec<RelationSymbol>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let names = constants
            .iter()
            .chain(functions.iter().map(|f| &f.name))
            .chain(relations.iter().map(|r| &r.name));
        for name in names {
            if !is_identifier(name) || RESERVED.contains(&name.as_str()) {
                return Err(Error::Signature(format!(
                    "`{name}` is not a usable symbol name"
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Signature(format!("symbol `{name}` declared twice")));
            }
        }
        for f in &functions {
            if f.arity == 0 {
                return Err(Error::Signature(format!(
                    "function `{}` has arity 0",
                    f.name
                )));
            }
        }
        for r in &relations {
            if r.arity == 0 {
                return Err(Error::Signature(format!(
                    "relation `{}` has arity 0",
                    r.name
                )));
            }
            if r.bound.is_negative() {
                return Err(Error::Signature(format!(
                    "relation `{}` has negative bound",
                    r.name
                )));
            }
        }
        Ok(Signature {
            constants,
            functions,
            relations,
        })
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSymbol> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSymbol> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn metric_bound(&self) -> Rational {
        Rational::one()
    }
}
