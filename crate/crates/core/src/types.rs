//! Types relative to a finite fragment of formulas.
//!
//! A type is represented by its value vector on the fragment. Results here
//! are always fragment-relative: agreement on a fragment is evidence, not a
//! proof, of elementary equivalence.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::charge::Charge;
use crate::error::{domain, Error, Result};
use crate::formula::{
    enumerate_fragment, enumerate_prenex, Evaluator, Formula, FragmentSpec, MaskedAtom, Term,
};
use crate::lp::{solve, LinearProgram, LpOutcome, Sense, VarKind};
use crate::mean::{powermean, MeanOptions, MeanStructure};
use crate::rational::Rational;
use crate::signature::Signature;
use crate::structure::{all_tuples, FiniteStructure, PNorm};

/// An ordered list of formulas over a shared tuple of free variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragment {
    formulas: Vec<Formula>,
    vars: Vec<String>,
    p: PNorm,
    continuous: bool,
}

impl Fragment {
    /// A p-linear fragment; the variable tuple is the union of free variables in first-occurrence order.
    pub fn new(formulas: Vec<Formula>, p: PNorm) -> Result<Self> {
        let vars = union_vars(&formulas);
        Self::build(formulas, vars, p, false)
    }

    /// A fragment that may use `min`/`max` and arbitrary metric exponents.
    pub fn continuous(formulas: Vec<Formula>, p: PNorm) -> Result<Self> {
        let vars = union_vars(&formulas);
        Self::build(formulas, vars, p, true)
    }

    /// A fragment over an explicit variable tuple.
    pub fn with_vars(
        formulas: Vec<Formula>,
        vars: Vec<String>,
        p: PNorm,
        continuous: bool,
    ) -> Result<Self> {
        Self::build(formulas, vars, p, continuous)
    }

    /// The enumerated fragment of `spec`; continuous iff it asks for lattice combinations.
    pub fn enumerated(spec: &FragmentSpec, sig: &Signature, p: PNorm) -> Result<Self> {
        let formulas = enumerate_fragment(spec, sig, p)?;
        Self::build(formulas, spec.free_vars.clone(), p, spec.lattice)
    }

    fn build(
        formulas: Vec<Formula>,
        vars: Vec<String>,
        p: PNorm,
        continuous: bool,
    ) -> Result<Self> {
        let declared: BTreeSet<&String> = vars.iter().collect();
        if declared.len() != vars.len() {
            return domain("fragment variables must be distinct");
        }
        for f in &formulas {
            if let Some(v) = f.free_vars().into_iter().find(|v| !declared.contains(v)) {
                return domain(format!(
                    "`{f}` has free variable `{v}` outside the fragment tuple"
                ));
            }
            if !continuous {
                f.require_linear(p)?;
            }
        }
        Ok(Fragment {
            formulas,
            vars,
            p,
            continuous,
        })
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn p(&self) -> PNorm {
        self.p
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    fn evaluators<'s>(&self, s: &'s FiniteStructure) -> Result<Vec<Evaluator<'s>>> {
        self.formulas
            .iter()
            .map(|f| Evaluator::new(f, s, &self.vars))
            .collect()
    }
}

fn union_vars(formulas: &[Formula]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for f in formulas {
        for v in f.free_vars() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Values of a fragment, aligned with its formulas.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct TypeVector {
    #[serde(with = "crate::rational::serde_vec")]
    pub values: Vec<Rational>,
}

impl TypeVector {
    pub fn new(values: Vec<Rational>) -> Self {
        TypeVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ w_k·v_k`.
    pub fn combine(terms: &[(Rational, &TypeVector)]) -> Result<TypeVector> {
        let dim = terms.first().map(|(_, v)| v.len()).unwrap_or(0);
        if terms.iter().any(|(_, v)| v.len() != dim) {
            return domain("type vectors of different lengths");
        }
        let mut out = vec![Rational::zero(); dim];
        for (w, v) in terms {
            for (o, x) in out.iter_mut().zip(&v.values) {
                *o += w * x;
            }
        }
        Ok(TypeVector::new(out))
    }
}

/// The type vector of `ā` in `s`.
pub fn type_of(s: &FiniteStructure, fragment: &Fragment, tuple: &[usize]) -> Result<TypeVector> {
    let evs = fragment.evaluators(s)?;
    Ok(TypeVector::new(
        evs.iter().map(|e| e.eval(tuple)).collect::<Result<_>>()?,
    ))
}

/// Every tuple of `Mⁿ` in lexicographic order with its type vector.
pub fn realized_types(
    m: &FiniteStructure,
    fragment: &Fragment,
    n: usize,
) -> Result<Vec<(Vec<usize>, TypeVector)>> {
    if n != fragment.arity() {
        return domain(format!(
            "fragment has {} free variables, arity {n} requested",
            fragment.arity()
        ));
    }
    let evs = fragment.evaluators(m)?;
    all_tuples(m.size(), n)
        .map(|t| {
            let values = evs.iter().map(|e| e.eval(&t)).collect::<Result<_>>()?;
            Ok((t, TypeVector::new(values)))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Extremality {
    /// `a·v − b ≥ 1` while `a·w − b ≤ 0` for every other distinct vector `w`.
    Extreme {
        #[serde(with = "crate::rational::serde_vec")]
        separator: Vec<Rational>,
        #[serde(with = "crate::rational::serde_str")]
        offset: Rational,
    },
    /// Convex weights on other vectors (by input position) recombining to this one.
    Combination { weights: Vec<(usize, String)> },
}

impl Extremality {
    pub fn is_extreme(&self) -> bool {
        matches!(self, Extremality::Extreme { .. })
    }
}

/// Decides for each vector whether it is a convex combination of the other
/// distinct vectors of the list, with an exact certificate either way.
pub fn extreme_types(vectors: &[TypeVector]) -> Result<Vec<Extremality>> {
    let Some(first) = vectors.first() else {
        return domain("extreme_types needs a non-empty list");
    };
    let dim = first.len();
    if vectors.iter().any(|v| v.len() != dim) {
        return domain("type vectors of different lengths");
    }
    let mut out = Vec::with_capacity(vectors.len());
    for v in vectors {
        // first occurrence of each distinct vector other than v
        let mut others: Vec<usize> = Vec::new();
        for (j, w) in vectors.iter().enumerate() {
            if w != v && !others.iter().any(|&o| vectors[o] == *w) {
                others.push(j);
            }
        }
        let k = others.len();
        let mut lp = LinearProgram::feasibility(k, VarKind::NonNeg);
        lp.constrain(vec![Rational::one(); k], Sense::Eq, Rational::one());
        for d in 0..dim {
            lp.constrain(
                others
                    .iter()
                    .map(|&o| vectors[o].values[d].clone())
                    .collect(),
                Sense::Eq,
                v.values[d].clone(),
            );
        }
        match solve(&lp)? {
            LpOutcome::Optimal { point, .. } => {
                let weights = others
                    .iter()
                    .zip(point)
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(&o, w)| (o, crate::rational::format(&w)))
                    .collect();
                out.push(Extremality::Combination { weights });
            }
            LpOutcome::Infeasible => {
                // variables: a_1..a_dim, b; all free
                let mut sep = LinearProgram::feasibility(dim + 1, VarKind::Free);
                for &o in &others {
                    let mut row: Vec<Rational> = vectors[o].values.clone();
                    row.push(-Rational::one());
                    sep.constrain(row, Sense::Le, Rational::zero());
                }
                let mut row = v.values.clone();
                row.push(-Rational::one());
                sep.constrain(row, Sense::Ge, Rational::one());
                match solve(&sep)? {
                    LpOutcome::Optimal { mut point, .. } => {
                        let offset = point.pop().expect("offset variable");
                        out.push(Extremality::Extreme {
                            separator: point,
                            offset,
                        });
                    }
                    other => {
                        return Err(Error::Internal(format!(
                            "separating hyperplane problem returned {other:?}"
                        )))
                    }
                }
            }
            LpOutcome::Unbounded => {
                return Err(Error::Internal("feasibility problem unbounded".into()))
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct Realization {
    /// The powermean over the support of the weights.
    pub mean: MeanStructure,
    /// Tuples of `Mⁿ` carrying positive weight, in lexicographic order.
    pub support: Vec<Vec<usize>>,
    /// One element of the mean per fragment variable: the class of the coordinate projection.
    pub elements: Vec<usize>,
    pub vector: TypeVector,
    /// `Σ w(ā)·tp(ā)`.
    pub expected: TypeVector,
}

/// Realizes the weighted combination of realized types in a powermean:
/// the index set is the support of `weights` (a charge on `Mⁿ` in
/// lexicographic order) and the realizing tuple is the coordinate projections.
pub fn realize_convex_type(
    m: &FiniteStructure,
    weights: &Charge,
    fragment: &Fragment,
    opts: MeanOptions,
) -> Result<Realization> {
    if fragment.p() != opts.p {
        return domain("fragment and mean use different p");
    }
    for f in fragment.formulas() {
        f.require_linear(opts.p)?;
    }
    let n = fragment.arity();
    let total = (m.size() as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if weights.len() as u128 != total {
        return domain(format!(
            "weights have {} entries, expected |M|^{n} = {total}",
            weights.len()
        ));
    }
    let types = realized_types(m, fragment, n)?;
    let support_idx = weights.support();
    let support: Vec<Vec<usize>> = support_idx.iter().map(|&i| types[i].0.clone()).collect();
    let labels: Vec<String> = support
        .iter()
        .map(|t| {
            let names: Vec<&str> = t.iter().map(|&a| m.element_name(a)).collect();
            format!("({})", names.join(","))
        })
        .collect();
    let restricted = Charge::new(
        labels,
        support_idx
            .iter()
            .map(|&i| weights.weight(i).clone())
            .collect(),
    )?;
    let mean = powermean(m, restricted, opts)?;
    let elements: Vec<usize> = (0..n)
        .map(|v| {
            let raw: Vec<usize> = support.iter().map(|t| t[v]).collect();
            mean.class_of(&raw)
        })
        .collect::<Result<_>>()?;
    let vector = type_of(mean.base(), fragment, &elements)?;
    let terms: Vec<(Rational, &TypeVector)> = support_idx
        .iter()
        .map(|&i| (weights.weight(i).clone(), &types[i].1))
        .collect();
    let expected = TypeVector::combine(&terms)?;
    Ok(Realization {
        mean,
        support,
        elements,
        vector,
        expected,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Disagreement {
    pub sentence: String,
    #[serde(with = "crate::rational::serde_str")]
    pub left: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub right: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivReport {
    pub sentences_checked: usize,
    pub counterexample: Option<Disagreement>,
    pub verdict: String,
}

impl EquivReport {
    pub fn indistinguishable(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Evaluates each sentence on both structures and stops at the first exact disagreement.
pub fn equiv_check_sentences(
    m: &FiniteStructure,
    n: &FiniteStructure,
    sentences: &[Formula],
) -> Result<EquivReport> {
    if m.signature() != n.signature() {
        return Err(Error::Signature(
            "structures have different signatures".into(),
        ));
    }
    for (k, s) in sentences.iter().enumerate() {
        if !s.is_sentence() {
            return domain(format!("`{s}` is not a sentence"));
        }
        let left = Evaluator::new(s, m, &[])?.eval(&[])?;
        let right = Evaluator::new(s, n, &[])?.eval(&[])?;
        if left != right {
            return Ok(EquivReport {
                sentences_checked: k + 1,
                counterexample: Some(Disagreement {
                    sentence: s.to_string(),
                    left,
                    right,
                }),
                verdict: "distinguished".into(),
            });
        }
    }
    Ok(EquivReport {
        sentences_checked: sentences.len(),
        counterexample: None,
        verdict: "indistinguishable over fragment (not a proof of equivalence)".into(),
    })
}

/// [`equiv_check_sentences`] over the sentences enumerated from the fragment description.
pub fn equiv_check(
    m: &FiniteStructure,
    n: &FiniteStructure,
    spec: &FragmentSpec,
    p: PNorm,
) -> Result<EquivReport> {
    if m.signature() != n.signature() {
        return Err(Error::Signature(
            "structures have different signatures".into(),
        ));
    }
    if !spec.free_vars.is_empty() {
        return domain("equivalence is checked on sentences; the fragment has free variables");
    }
    let sentences = enumerate_fragment(spec, m.signature(), p)?;
    equiv_check_sentences(m, n, &sentences)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    M,
    N,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameMove {
    pub side: Side,
    pub challenge: String,
    pub reply: String,
    pub then: Vec<GameMove>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameFailure {
    /// 1-based round at which the challenge has no type-preserving partner.
    pub round: usize,
    pub side: Side,
    pub challenge: String,
    /// Matched pairs `(m, n)` before this round, along the first replies.
    pub history: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GameOutcome {
    Success { strategy: Vec<GameMove> },
    Failure { witness: GameFailure },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameReport {
    pub depth: usize,
    #[serde(flatten)]
    pub outcome: GameOutcome,
    pub note: String,
}

impl GameReport {
    pub fn success(&self) -> bool {
        matches!(self.outcome, GameOutcome::Success { .. })
    }
}

struct Game<'a> {
    m: &'a FiniteStructure,
    n: &'a FiniteStructure,
    fm: Vec<TypeVector>,
    fnn: Vec<TypeVector>,
    dm: Vec<Rational>,
    dn: Vec<Rational>,
    memo: HashMap<(Vec<(usize, usize)>, usize), bool>,
}

impl Game<'_> {
    /// Whether extending the position by `(a, b)` keeps the tuple types equal.
    fn compatible(&self, pos: &[(usize, usize)], a: usize, b: usize) -> bool {
        let (sm, sn) = (self.m.size(), self.n.size());
        self.fm[a] == self.fnn[b]
            && pos
                .iter()
                .all(|&(x, y)| self.dm[a * sm + x] == self.dn[b * sn + y])
    }

    fn challenges(&self, pos: &[(usize, usize)]) -> Vec<(Side, usize)> {
        let mut out: Vec<(Side, usize)> = (0..self.m.size())
            .filter(|a| !pos.iter().any(|p| p.0 == *a))
            .map(|a| (Side::M, a))
            .collect();
        out.extend(
            (0..self.n.size())
                .filter(|b| !pos.iter().any(|p| p.1 == *b))
                .map(|b| (Side::N, b)),
        );
        out
    }

    fn replies(&self, pos: &[(usize, usize)], side: Side, c: usize) -> Vec<(usize, usize)> {
        match side {
            Side::M => (0..self.n.size())
                .filter(|b| !pos.iter().any(|p| p.1 == *b) && self.compatible(pos, c, *b))
                .map(|b| (c, b))
                .collect(),
            Side::N => (0..self.m.size())
                .filter(|a| !pos.iter().any(|p| p.0 == *a) && self.compatible(pos, *a, c))
                .map(|a| (a, c))
                .collect(),
        }
    }

    fn extend(pos: &[(usize, usize)], pair: (usize, usize)) -> Vec<(usize, usize)> {
        let mut next = pos.to_vec();
        next.push(pair);
        next.sort_unstable();
        next
    }

    fn wins(&mut self, pos: &[(usize, usize)], rounds: usize) -> bool {
        if rounds == 0 {
            return true;
        }
        let key = (pos.to_vec(), rounds);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut result = true;
        for (side, c) in self.challenges(pos) {
            let replies = self.replies(pos, side, c);
            if !replies
                .into_iter()
                .any(|r| self.wins(&Self::extend(pos, r), rounds - 1))
            {
                result = false;
                break;
            }
        }
        self.memo.insert(key, result);
        result
    }

    fn strategy(&mut self, pos: &[(usize, usize)], rounds: usize) -> Vec<GameMove> {
        if rounds == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (side, c) in self.challenges(pos) {
            let replies = self.replies(pos, side, c);
            let r = replies
                .into_iter()
                .find(|r| self.wins(&Self::extend(pos, *r), rounds - 1))
                .expect("winning position has a winning reply");
            let (challenge, reply) = match side {
                Side::M => (self.m.element_name(r.0), self.n.element_name(r.1)),
                Side::N => (self.n.element_name(r.1), self.m.element_name(r.0)),
            };
            let (challenge, reply) = (challenge.to_string(), reply.to_string());
            let then = self.strategy(&Self::extend(pos, r), rounds - 1);
            out.push(GameMove {
                side,
                challenge,
                reply,
                then,
            });
        }
        out
    }

    fn failure(
        &mut self,
        pos: &[(usize, usize)],
        history: Vec<(usize, usize)>,
        rounds: usize,
    ) -> GameFailure {
        for (side, c) in self.challenges(pos) {
            let replies = self.replies(pos, side, c);
            if replies
                .iter()
                .any(|r| self.wins(&Self::extend(pos, *r), rounds - 1))
            {
                continue;
            }
            match replies.first() {
                None => {
                    let name = match side {
                        Side::M => self.m.element_name(c),
                        Side::N => self.n.element_name(c),
                    };
                    return GameFailure {
                        round: history.len() + 1,
                        side,
                        challenge: name.to_string(),
                        history: history
                            .iter()
                            .map(|&(a, b)| {
                                (
                                    self.m.element_name(a).to_string(),
                                    self.n.element_name(b).to_string(),
                                )
                            })
                            .collect(),
                    };
                }
                Some(&r) => {
                    let mut h = history.clone();
                    h.push(r);
                    return self.failure(&Self::extend(pos, r), h, rounds - 1);
                }
            }
        }
        unreachable!("a losing position has a refuting challenge")
    }
}

/// Plays the type-preserving back-and-forth game for `depth` rounds. The
/// type of a matched tuple is the fragment vector of each coordinate plus
/// the exact pairwise `d^p`; a round challenges every unmatched element on both sides.
pub fn back_and_forth(
    m: &FiniteStructure,
    n: &FiniteStructure,
    fragment: &Fragment,
    depth: usize,
) -> Result<GameReport> {
    if m.signature() != n.signature() {
        return Err(Error::Signature(
            "structures have different signatures".into(),
        ));
    }
    if fragment.arity() != 1 {
        return domain("the game fragment must have exactly one free variable");
    }
    if depth == 0 {
        return domain("game depth must be positive");
    }
    let p = fragment.p().get();
    let vectors = |s: &FiniteStructure| -> Result<Vec<TypeVector>> {
        let evs = fragment.evaluators(s)?;
        (0..s.size())
            .map(|a| {
                Ok(TypeVector::new(
                    evs.iter().map(|e| e.eval(&[a])).collect::<Result<_>>()?,
                ))
            })
            .collect()
    };
    let distances = |s: &FiniteStructure| -> Result<Vec<Rational>> {
        let k = s.size();
        (0..k * k)
            .map(|i| s.metric_power(i / k, i % k, p))
            .collect()
    };
    let mut game = Game {
        m,
        n,
        fm: vectors(m)?,
        fnn: vectors(n)?,
        dm: distances(m)?,
        dn: distances(n)?,
        memo: HashMap::new(),
    };
    let outcome = if game.wins(&[], depth) {
        GameOutcome::Success {
            strategy: game.strategy(&[], depth),
        }
    } else {
        GameOutcome::Failure {
            witness: game.failure(&[], Vec::new(), depth),
        }
    };
    Ok(GameReport {
        depth,
        outcome,
        note: "relative to the given fragment and depth; success is not a proof of equivalence"
            .into(),
    })
}

/// Prenex affine sentences over the game atoms: each fragment formula at each
/// bound variable, and `d(x_i,x_j)^p` for pairs. A won game of depth `k`
/// forces agreement on all of these with quantifier depth at most `k`.
pub fn game_sentences(
    fragment: &Fragment,
    sig: &Signature,
    depth: usize,
    max_atoms: usize,
    grid: &[Rational],
) -> Result<Vec<Formula>> {
    if fragment.arity() != 1 {
        return domain("the game fragment must have exactly one free variable");
    }
    let free = &fragment.vars()[0];
    let mut avoid: BTreeSet<String> = sig.constants.iter().cloned().collect();
    for f in fragment.formulas() {
        avoid.extend(f.all_vars());
    }
    let bound: Vec<String> = (1..)
        .map(|i| format!("x{i}"))
        .filter(|v| !avoid.contains(v))
        .take(depth)
        .collect();
    let p = fragment.p().get();
    let atoms_for = |k: usize| -> Vec<MaskedAtom> {
        let mut atoms = Vec::new();
        for (i, v) in bound[..k].iter().enumerate() {
            for f in fragment.formulas() {
                atoms.push((f.rename_free(free, v), 1u64 << i));
            }
        }
        for i in 0..k {
            for j in i + 1..k {
                atoms.push((
                    Formula::metric(Term::var(&bound[i]), Term::var(&bound[j]), p),
                    (1u64 << i) | (1u64 << j),
                ));
            }
        }
        atoms
    };
    enumerate_prenex(depth, max_atoms, grid, false, &bound, &atoms_for)
}
