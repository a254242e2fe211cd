//! Sound bounds and moduli for formulas.
//!
//! Moduli are tracked per free variable: `|φ(x̄) − φ(ȳ)| ≤ Σ_v λ_v(d(x_v, y_v))`.
//! The joint modulus then bounds the variation in terms of the p-product
//! distance `D = (Σ_v d(x_v,y_v)^p)^(1/p)` of the whole free-variable tuple,
//! using `Σ_v δ_v = D` when `p = 1` and `δ_v ≤ D` otherwise.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::rational::{int, Rational};
use crate::signature::{Modulus, Piece, Signature};
use crate::structure::PNorm;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gauge {
    #[serde(with = "crate::rational::serde_str")]
    pub bound: Rational,
    /// One modulus per free variable, in [`Formula::free_vars`] order.
    pub variables: Vec<(String, Modulus)>,
    /// Modulus with respect to the p-product metric on the free-variable tuple.
    pub joint: Modulus,
}

type PerVar = BTreeMap<String, Modulus>;

fn add_into(acc: &mut PerVar, other: PerVar) {
    for (v, m) in other {
        match acc.get_mut(&v) {
            Some(existing) => *existing = existing.sum(&m),
            None => {
                acc.insert(v, m);
            }
        }
    }
}

fn term_moduli(t: &Term, sig: &Signature) -> Result<PerVar> {
    Ok(match t {
        Term::Var(v) => PerVar::from([(v.clone(), Modulus::identity())]),
        Term::Const(_) => PerVar::new(),
        Term::Apply(f, args) => {
            let sym = sig
                .function(f)
                .ok_or_else(|| Error::Signature(format!("unknown function `{f}`")))?;
            // d(F(u),F(u')) ≤ λ_F(Σ_k d(t_k,t_k')), split over variables by subadditivity
            let mut inner = PerVar::new();
            for a in args {
                add_into(&mut inner, term_moduli(a, sig)?);
            }
            inner
                .into_iter()
                .map(|(v, m)| (v, sym.modulus.compose(&m)))
                .collect()
        }
    })
}

fn go(f: &Formula, sig: &Signature) -> Result<(Rational, PerVar)> {
    Ok(match f {
        Formula::Const(r) => (r.abs(), PerVar::new()),
        Formula::Metric(a, b, k) => {
            // |d^k − d'^k| ≤ k·|d − d'| on [0,1]
            let mut m = term_moduli(a, sig)?;
            add_into(&mut m, term_moduli(b, sig)?);
            let k = int(i64::from(*k));
            (
                int(1),
                m.into_iter()
                    .map(|(v, m)| (v, m.scale_nonneg(&k)))
                    .collect(),
            )
        }
        Formula::Rel(r, args) => {
            let sym = sig
                .relation(r)
                .ok_or_else(|| Error::Signature(format!("unknown relation `{r}`")))?;
            let mut inner = PerVar::new();
            for a in args {
                add_into(&mut inner, term_moduli(a, sig)?);
            }
            let m = inner
                .into_iter()
                .map(|(v, m)| (v, sym.modulus.compose(&m)))
                .collect();
            (sym.bound.clone(), m)
        }
        Formula::Scale(r, g) => {
            let (b, m) = go(g, sig)?;
            let r = r.abs();
            if r.is_zero() {
                (Rational::zero(), PerVar::new())
            } else {
                (
                    &b * &r,
                    m.into_iter()
                        .map(|(v, m)| (v, m.scale_nonneg(&r)))
                        .collect(),
                )
            }
        }
        Formula::Sum(a, b) => {
            let (ba, mut ma) = go(a, sig)?;
            let (bb, mb) = go(b, sig)?;
            add_into(&mut ma, mb);
            (ba + bb, ma)
        }
        Formula::Meet(a, b) | Formula::Join(a, b) => {
            let (ba, mut ma) = go(a, sig)?;
            let (bb, mb) = go(b, sig)?;
            add_into(&mut ma, mb);
            (std::cmp::max(ba, bb), ma)
        }
        Formula::Sup(v, g) | Formula::Inf(v, g) => {
            let (b, mut m) = go(g, sig)?;
            m.remove(v);
            (b, m)
        }
    })
}

/// Combines per-variable moduli into one modulus of the joint p-product distance.
fn joint(per_var: &[(String, Modulus)], p: PNorm) -> Modulus {
    let mut combos: Vec<Piece> = vec![Piece::new(Rational::zero(), Rational::zero())];
    for (_, m) in per_var {
        let mut next = Vec::with_capacity(combos.len() * m.pieces().len());
        for c in &combos {
            for piece in m.pieces() {
                let slope = if p.get() == 1 {
                    std::cmp::max(c.slope.clone(), piece.slope.clone())
                } else {
                    &c.slope + &piece.slope
                };
                next.push(Piece::new(slope, &c.intercept + &piece.intercept));
            }
        }
        combos = Modulus::new(next)
            .expect("zero-intercept combination present")
            .pieces()
            .to_vec();
    }
    Modulus::new(combos).expect("zero-intercept combination present")
}

/// Infers a bound `|φ| ≤ b` and moduli of uniform continuity for `φ`,
/// valid on every structure over `sig` for the p-product metric.
pub fn infer_gauge(f: &Formula, sig: &Signature, p: PNorm) -> Result<Gauge> {
    f.check_signature(sig)?;
    let (bound, mut per_var) = go(f, sig)?;
    let variables: Vec<(String, Modulus)> = f
        .free_vars()
        .into_iter()
        .map(|v| {
            let m = per_var.remove(&v).unwrap_or_else(Modulus::zero);
            (v, m)
        })
        .collect();
    let joint = joint(&variables, p);
    Ok(Gauge {
        bound,
        variables,
        joint,
    })
}
