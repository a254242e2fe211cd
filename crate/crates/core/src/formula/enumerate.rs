//! Deterministic enumeration of prenex affine formulas.
//!
//! A [`FragmentSpec`] generates every formula `Q₁x₁ … Q_k x_k. Σ_j c_j·α_j`
//! with `k ≤ depth`, a set of at most `max_atoms` distinct atoms `α_j`, and
//! nonzero coefficients `c_j` drawn from the grid. Every quantified
//! variable must occur in the matrix. Output is ordered by `k`, then by the
//! atom index set (lexicographically), then by coefficients, then by the
//! quantifier prefix (sup before inf).

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Formula, Term};
use crate::error::{domain, Result};
use crate::rational::Rational;
use crate::signature::Signature;
use crate::structure::PNorm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FragmentSpec {
    pub depth: usize,
    pub max_atoms: usize,
    #[serde(with = "crate::rational::serde_vec")]
    pub grid: Vec<Rational>,
    #[serde(default)]
    pub free_vars: Vec<String>,
    /// Also emit `min`/`max` of pairs of scaled atoms under each prefix.
    #[serde(default)]
    pub lattice: bool,
    /// Nesting depth of function applications in atom arguments.
    #[serde(default)]
    pub term_depth: usize,
}

const NAME_POOL: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

pub(crate) fn bound_names(count: usize, avoid: &BTreeSet<String>) -> Vec<String> {
    NAME_POOL
        .iter()
        .map(|s| s.to_string())
        .chain((1..).map(|i| format!("x{i}")))
        .filter(|n| !avoid.contains(n))
        .take(count)
        .collect()
}

/// An atom together with the bitmask of bound variables it mentions.
pub type MaskedAtom = (Formula, u64);

/// The generic enumerator. `atoms_for(k)` lists the atoms available when
/// the first `k` names of `bound` are quantified.
pub fn enumerate_prenex(
    depth: usize,
    max_atoms: usize,
    grid: &[Rational],
    lattice: bool,
    bound: &[String],
    atoms_for: &dyn Fn(usize) -> Vec<MaskedAtom>,
) -> Result<Vec<Formula>> {
    let mut coeffs: Vec<Rational> = Vec::new();
    for c in grid {
        if !c.is_zero() && !coeffs.contains(c) {
            coeffs.push(c.clone());
        }
    }
    if coeffs.is_empty() {
        return domain("coefficient grid has no nonzero entry");
    }
    if max_atoms == 0 {
        return domain("max_atoms must be at least 1");
    }
    if bound.len() < depth {
        return domain("not enough bound variable names for the requested depth");
    }
    if depth > 16 {
        return domain("quantifier depth above 16 is not supported");
    }
    let mut out = Vec::new();
    for k in 0..=depth {
        let full: u64 = (1u64 << k) - 1;
        let atoms = atoms_for(k);
        let mut matrices: Vec<Formula> = Vec::new();
        let mut chosen = Vec::new();
        subsets(
            &atoms,
            max_atoms,
            0,
            0,
            &mut chosen,
            &mut |set: &[usize], mask| {
                if mask != full {
                    return;
                }
                let mut picks = vec![0usize; set.len()];
                loop {
                    let terms = set
                        .iter()
                        .zip(&picks)
                        .map(|(&a, &c)| (coeffs[c].clone(), atoms[a].0.clone()))
                        .collect();
                    matrices.push(Formula::affine(terms));
                    if !advance(&mut picks, coeffs.len()) {
                        break;
                    }
                }
            },
        );
        if lattice {
            let signed: Vec<(Formula, u64)> = atoms
                .iter()
                .flat_map(|(a, m)| {
                    coeffs
                        .iter()
                        .map(move |c| (Formula::affine(vec![(c.clone(), a.clone())]), *m))
                })
                .collect();
            for i in 0..signed.len() {
                for j in i + 1..signed.len() {
                    if signed[i].1 | signed[j].1 != full {
                        continue;
                    }
                    matrices.push(Formula::meet(signed[i].0.clone(), signed[j].0.clone()));
                    matrices.push(Formula::join(signed[i].0.clone(), signed[j].0.clone()));
                }
            }
        }
        for matrix in matrices {
            for prefix in 0..(1u32 << k) {
                let mut f = matrix.clone();
                for q in (0..k).rev() {
                    // bit q of the prefix, most significant first
                    let is_inf = prefix >> (k - 1 - q) & 1 == 1;
                    f = if is_inf {
                        Formula::inf(&bound[q], f)
                    } else {
                        Formula::sup(&bound[q], f)
                    };
                }
                out.push(f);
            }
        }
    }
    Ok(out)
}

fn subsets(
    atoms: &[MaskedAtom],
    max: usize,
    start: usize,
    mask: u64,
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize], u64),
) {
    for i in start..atoms.len() {
        chosen.push(i);
        let m = mask | atoms[i].1;
        emit(chosen, m);
        if chosen.len() < max {
            subsets(atoms, max, i + 1, m, chosen, emit);
        }
        chosen.pop();
    }
}

fn advance(picks: &mut [usize], base: usize) -> bool {
    for slot in picks.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Terms over the given variables and the signature's constants, with
/// functions nested up to `term_depth`. Each term carries its bound-variable mask.
fn terms(vars: &[(String, u64)], sig: &Signature, term_depth: usize) -> Vec<(Term, u64)> {
    let mut out: Vec<(Term, u64)> = vars
        .iter()
        .map(|(v, m)| (Term::Var(v.clone()), *m))
        .collect();
    out.extend(sig.constants.iter().map(|c| (Term::Const(c.clone()), 0)));
    for _ in 0..term_depth {
        let base = out.clone();
        for f in &sig.functions {
            for args in tuples(&base, f.arity) {
                let mask = args.iter().fold(0, |m, (_, a)| m | a);
                let t = Term::Apply(f.name.clone(), args.into_iter().map(|(t, _)| t).collect());
                if !out.iter().any(|(u, _)| *u == t) {
                    out.push((t, mask));
                }
            }
        }
    }
    out
}

fn tuples<T: Clone>(items: &[T], arity: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |it| {
                    let mut v = prefix.clone();
                    v.push(it.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Relation atoms over all term tuples, then `d(s,t)^p` for pairs of distinct terms.
pub(crate) fn signature_atoms(
    vars: &[(String, u64)],
    sig: &Signature,
    p: PNorm,
    term_depth: usize,
) -> Vec<MaskedAtom> {
    let ts = terms(vars, sig, term_depth);
    let mut atoms = Vec::new();
    for r in &sig.relations {
        for args in tuples(&ts, r.arity) {
            let mask = args.iter().fold(0, |m, (_, a)| m | a);
            atoms.push((
                Formula::Rel(r.name.clone(), args.into_iter().map(|(t, _)| t).collect()),
                mask,
            ));
        }
    }
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            atoms.push((
                Formula::Metric(ts[i].0.clone(), ts[j].0.clone(), p.get()),
                ts[i].1 | ts[j].1,
            ));
        }
    }
    atoms
}

/// Enumerates the fragment described by `spec` over `sig`, with metric atoms `d(·,·)^p`.
pub fn enumerate_fragment(spec: &FragmentSpec, sig: &Signature, p: PNorm) -> Result<Vec<Formula>> {
    let mut avoid: BTreeSet<String> = spec.free_vars.iter().cloned().collect();
    avoid.extend(sig.constants.iter().cloned());
    let bound = bound_names(spec.depth, &avoid);
    let atoms_for = |k: usize| {
        let mut vars: Vec<(String, u64)> = spec.free_vars.iter().map(|v| (v.clone(), 0)).collect();
        vars.extend(
            bound[..k]
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), 1u64 << i)),
        );
        signature_atoms(&vars, sig, p, spec.term_depth)
    };
    enumerate_prenex(
        spec.depth,
        spec.max_atoms,
        &spec.grid,
        spec.lattice,
        &bound,
        &atoms_for,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::rational::int;
    use crate::signature::{Modulus, RelationSymbol};

    fn sig(constants: Vec<String>) -> Signature {
        Signature::new(
            constants,
            vec![],
            vec![RelationSymbol {
                name: "R".into(),
                arity: 1,
                bound: int(1),
                modulus: Modulus::identity(),
            }],
        )
        .unwrap()
    }

    fn spec(depth: usize, max_atoms: usize, grid: &[i64]) -> FragmentSpec {
        FragmentSpec {
            depth,
            max_atoms,
            grid: grid.iter().map(|&g| int(g)).collect(),
            free_vars: vec![],
            lattice: false,
            term_depth: 0,
        }
    }

    #[test]
    fn small_examples() {
        let s = sig(vec!["c".into()]);
        let f = enumerate_fragment(&spec(0, 1, &[1]), &s, PNorm::ONE).unwrap();
        assert!(f.contains(&parse("R(c)", &s).unwrap()));
        let s = sig(vec![]);
        let f = enumerate_fragment(&spec(1, 1, &[1]), &s, PNorm::ONE).unwrap();
        assert!(f.contains(&parse("sup x. R(x)", &s).unwrap()));
        assert!(f.contains(&parse("inf x. R(x)", &s).unwrap()));
        assert!(f.iter().all(|g| g.is_sentence() && g.is_linear(PNorm::ONE)));
    }

    #[test]
    fn deterministic_and_duplicate_free() {
        let s = sig(vec!["c".into()]);
        let mut sp = spec(2, 2, &[-1, 0, 1]);
        sp.lattice = true;
        let a = enumerate_fragment(&sp, &s, PNorm::ONE).unwrap();
        let b = enumerate_fragment(&sp, &s, PNorm::ONE).unwrap();
        assert_eq!(a, b);
        let distinct: std::collections::HashSet<_> = a.iter().collect();
        assert_eq!(distinct.len(), a.len());
        assert!(a.iter().any(|f| !f.is_linear(PNorm::ONE)));
    }

    #[test]
    fn errors() {
        let s = sig(vec![]);
        assert!(enumerate_fragment(&spec(1, 1, &[]), &s, PNorm::ONE).is_err());
        assert!(enumerate_fragment(&spec(1, 1, &[0]), &s, PNorm::ONE).is_err());
        assert!(enumerate_fragment(&spec(1, 0, &[1]), &s, PNorm::ONE).is_err());
    }

    #[test]
    fn free_vars_are_avoided_by_binders() {
        let s = sig(vec![]);
        let mut sp = spec(1, 1, &[1]);
        sp.free_vars = vec!["x".into()];
        let f = enumerate_fragment(&sp, &s, PNorm::ONE).unwrap();
        assert!(f.contains(&parse("R(x)", &s).unwrap()));
        assert!(f.contains(&parse("sup y. d(x,y)", &s).unwrap()));
        assert!(f.iter().all(|g| g.free_vars().iter().all(|v| v == "x")));
    }
}
