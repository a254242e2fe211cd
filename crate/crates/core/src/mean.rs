//! Ultramean and powermean structures over finite index sets.
//!
//! The raw product `∏ M_i` is quotiented by exact zero p-power distance
//! `∫ d_i(a_i,b_i)^p dμ = 0`. Constants and functions act coordinatewise,
//! relations are integrated against the charge, and the metric between
//! classes stores the exact `∫ d_i^p dμ`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::charge::Charge;
use crate::error::{domain, Error, Result};
use crate::formula::{Evaluator, Formula};
use crate::rational::Rational;
use crate::structure::{all_tuples, FiniteStructure, PNorm};

pub const DEFAULT_CAP: usize = 4096;

/// The raw-tuple cap, overridable through `MEANLOGIC_CAP`.
pub fn cap_from_env() -> usize {
    std::env::var("MEANLOGIC_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeanOptions {
    pub p: PNorm,
    /// Upper limit on `∏ |M_i|`.
    pub cap: usize,
}

impl Default for MeanOptions {
    fn default() -> Self {
        MeanOptions {
            p: PNorm::ONE,
            cap: DEFAULT_CAP,
        }
    }
}

impl MeanOptions {
    pub fn with_p(p: PNorm) -> Self {
        MeanOptions {
            p,
            ..Self::default()
        }
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
    }
}

/// A mean structure together with the data that produced it.
#[derive(Clone, Debug)]
pub struct MeanStructure {
    base: FiniteStructure,
    factors: Vec<FiniteStructure>,
    charge: Charge,
    p: PNorm,
    sizes: Vec<usize>,
    /// Class of each raw tuple, indexed by mixed-radix code (first factor most significant).
    class_of: Vec<usize>,
    representatives: Vec<Vec<usize>>,
}

impl MeanStructure {
    pub fn base(&self) -> &FiniteStructure {
        &self.base
    }

    pub fn factors(&self) -> &[FiniteStructure] {
        &self.factors
    }

    pub fn charge(&self) -> &Charge {
        &self.charge
    }

    pub fn p(&self) -> PNorm {
        self.p
    }

    pub fn class_count(&self) -> usize {
        self.representatives.len()
    }

    pub fn raw_count(&self) -> usize {
        self.class_of.len()
    }

    fn code(&self, raw: &[usize]) -> Result<usize> {
        if raw.len() != self.sizes.len() {
            return domain(format!(
                "raw tuple has {} coordinates, expected {}",
                raw.len(),
                self.sizes.len()
            ));
        }
        let mut code = 0usize;
        for (&a, &n) in raw.iter().zip(&self.sizes) {
            if a >= n {
                return domain("raw tuple coordinate outside its factor");
            }
            code = code * n + a;
        }
        Ok(code)
    }

    fn decode(&self, mut code: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &n) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = code % n;
            code /= n;
        }
        out
    }

    /// The class (element of the base) of a raw tuple.
    pub fn class_of(&self, raw: &[usize]) -> Result<usize> {
        Ok(self.class_of[self.code(raw)?])
    }

    /// The lexicographically least raw tuple of a class.
    pub fn representative(&self, class: usize) -> &[usize] {
        &self.representatives[class]
    }

    pub fn raw_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.class_of.len()).map(|c| self.decode(c))
    }

    /// All raw tuples of each class, classes in representative order.
    pub fn members(&self) -> Vec<Vec<Vec<usize>>> {
        let mut out = vec![Vec::new(); self.class_count()];
        for (code, &c) in self.class_of.iter().enumerate() {
            out[c].push(self.decode(code));
        }
        out
    }

    /// Sidecar describing the quotient: class name → raw tuples of element names.
    pub fn sidecar_json(&self) -> Value {
        let members = self.members();
        let classes: serde_json::Map<String, Value> = members
            .iter()
            .enumerate()
            .map(|(c, raws)| {
                let tuples: Vec<Value> = raws
                    .iter()
                    .map(|raw| {
                        Value::from(
                            raw.iter()
                                .zip(&self.factors)
                                .map(|(&a, f)| f.element_name(a).to_string())
                                .collect::<Vec<_>>(),
                        )
                    })
                    .collect();
                (self.base.element_name(c).to_string(), Value::from(tuples))
            })
            .collect();
        json!({
            "classes": classes,
            "charge": serde_json::to_value(&self.charge).expect("charge serializes"),
            "p": self.p.get(),
        })
    }
}

/// Builds `∏_μ M_i` with the p-norm metric `(∫ d_i^p dμ)^(1/p)`.
pub fn ultramean(
    factors: Vec<FiniteStructure>,
    charge: Charge,
    opts: MeanOptions,
) -> Result<MeanStructure> {
    let p = opts.p;
    let first = factors
        .first()
        .ok_or_else(|| Error::Domain("ultramean of no factors".into()))?;
    if charge.len() != factors.len() {
        return domain(format!(
            "charge has {} indices but there are {} factors",
            charge.len(),
            factors.len()
        ));
    }
    let sig = first.signature().clone();
    if let Some(i) = factors.iter().position(|f| *f.signature() != sig) {
        return Err(Error::Signature(format!(
            "factor {i} has a different signature"
        )));
    }
    let sizes: Vec<usize> = factors.iter().map(|f| f.size()).collect();
    let total = sizes
        .iter()
        .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128));
    let total = match total {
        Some(t) if t <= opts.cap as u128 => t as usize,
        Some(t) => {
            return Err(Error::CapExceeded {
                count: t,
                cap: opts.cap,
            })
        }
        None => {
            return Err(Error::CapExceeded {
                count: u128::MAX,
                cap: opts.cap,
            })
        }
    };
    let k = factors.len();
    let mut strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }

    // Zero distance is reached by changing one coordinate at a time through
    // zero-weight factors or zero stored distances.
    let mut sets = DisjointSets::new(total);
    for code in 0..total {
        for i in 0..k {
            let a = code / strides[i] % sizes[i];
            let free = charge.weight(i).is_zero();
            for b in a + 1..sizes[i] {
                if free || factors[i].stored_metric(a, b).is_zero() {
                    sets.union(code, code + (b - a) * strides[i]);
                }
            }
        }
    }
    let mut class_of = vec![usize::MAX; total];
    let mut root_class: BTreeMap<usize, usize> = BTreeMap::new();
    let mut reps_codes = Vec::new();
    for code in 0..total {
        let root = sets.find(code);
        let next = root_class.len();
        let c = *root_class.entry(root).or_insert_with(|| {
            reps_codes.push(code);
            next
        });
        class_of[code] = c;
    }
    let decode = |mut code: usize| {
        let mut out = vec![0; k];
        for (slot, &n) in out.iter_mut().zip(&sizes).rev() {
            *slot = code % n;
            code /= n;
        }
        out
    };
    let representatives: Vec<Vec<usize>> = reps_codes.iter().map(|&c| decode(c)).collect();
    let m = representatives.len();
    let encode = |raw: &[usize]| {
        raw.iter()
            .zip(&sizes)
            .fold(0usize, |acc, (&a, &n)| acc * n + a)
    };

    let weights = charge.weights();
    let mut metric = vec![vec![Rational::zero(); m]; m];
    for x in 0..m {
        for y in x + 1..m {
            let mut total = Rational::zero();
            for i in 0..k {
                if weights[i].is_zero() {
                    continue;
                }
                let (a, b) = (representatives[x][i], representatives[y][i]);
                if a != b {
                    total += &weights[i] * factors[i].metric_power(a, b, p.get())?;
                }
            }
            metric[x][y] = total.clone();
            metric[y][x] = total;
        }
    }

    let constants: Vec<usize> = (0..sig.constants.len())
        .map(|ci| {
            let raw: Vec<usize> = factors.iter().map(|f| f.constant(ci)).collect();
            class_of[encode(&raw)]
        })
        .collect();
    let functions: Vec<Vec<usize>> = sig
        .functions
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            all_tuples(m, f.arity)
                .map(|args| {
                    let raw: Vec<usize> = (0..k)
                        .map(|i| {
                            let coords: Vec<usize> =
                                args.iter().map(|&c| representatives[c][i]).collect();
                            factors[i].function_value(fi, &coords)
                        })
                        .collect();
                    class_of[encode(&raw)]
                })
                .collect()
        })
        .collect();
    let relations: Vec<Vec<Rational>> = sig
        .relations
        .iter()
        .enumerate()
        .map(|(ri, r)| {
            all_tuples(m, r.arity)
                .map(|args| {
                    let mut acc = Rational::zero();
                    for i in 0..k {
                        if weights[i].is_zero() {
                            continue;
                        }
                        let coords: Vec<usize> =
                            args.iter().map(|&c| representatives[c][i]).collect();
                        acc += &weights[i] * factors[i].relation_value(ri, &coords);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let base = FiniteStructure::from_parts(
        sig,
        (0..m).map(|c| format!("q{c}")).collect(),
        metric,
        p.get(),
        constants,
        functions,
        relations,
    )?;
    Ok(MeanStructure {
        base,
        factors,
        charge,
        p,
        sizes,
        class_of,
        representatives,
    })
}

/// `M^μ`: the ultramean of copies of `m`, one per index of `charge`.
pub fn powermean(m: &FiniteStructure, charge: Charge, opts: MeanOptions) -> Result<MeanStructure> {
    ultramean(vec![m.clone(); charge.len()], charge, opts)
}

/// `εM₁ + (1−ε)M₂`.
pub fn convex_combination(
    epsilon: &Rational,
    m1: &FiniteStructure,
    m2: &FiniteStructure,
    opts: MeanOptions,
) -> Result<MeanStructure> {
    let rest = Rational::from_integer(1.into()) - epsilon;
    let charge = Charge::new(vec!["1".into(), "2".into()], vec![epsilon.clone(), rest])?;
    ultramean(vec![m1.clone(), m2.clone()], charge, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanRow {
    /// One raw tuple per free variable.
    pub tuples: Vec<Vec<usize>>,
    #[serde(with = "crate::rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub rhs: Rational,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanTheoremReport {
    pub formula: String,
    pub free_vars: Vec<String>,
    pub rows: Vec<MeanRow>,
    pub holds: bool,
}

/// Up to `limit` assignments of raw tuples to `vars` variables, in lexicographic order.
pub fn raw_assignments(m: &MeanStructure, vars: usize, limit: usize) -> Vec<Vec<Vec<usize>>> {
    let total = m.raw_count();
    let count = (total as u128)
        .checked_pow(vars as u32)
        .unwrap_or(u128::MAX);
    let take = count.min(limit as u128) as usize;
    (0..take)
        .map(|c| {
            let codes = crate::structure::decode_tuple(total, vars, c);
            codes.into_iter().map(|code| m.decode(code)).collect()
        })
        .collect()
}

/// Compares `φ^M([a¹],…,[aⁿ])` with `∫ φ^{M_i}(a¹_i,…,aⁿ_i) dμ` for p-linear `φ`.
pub fn verify_mean_theorem(
    m: &MeanStructure,
    phi: &Formula,
    tuples: &[Vec<Vec<usize>>],
) -> Result<MeanTheoremReport> {
    phi.require_linear(m.p)?;
    let vars = phi.free_vars();
    let lhs_eval = Evaluator::new(phi, &m.base, &vars)?;
    let factor_evals: Vec<Evaluator<'_>> = m
        .factors
        .iter()
        .map(|f| Evaluator::new(phi, f, &vars))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(tuples.len());
    for assignment in tuples {
        if assignment.len() != vars.len() {
            return domain(format!(
                "assignment gives {} tuples for {} free variables",
                assignment.len(),
                vars.len()
            ));
        }
        let classes: Vec<usize> = assignment
            .iter()
            .map(|raw| m.class_of(raw))
            .collect::<Result<_>>()?;
        let lhs = lhs_eval.eval(&classes)?;
        let mut values = Vec::with_capacity(m.factors.len());
        for (i, ev) in factor_evals.iter().enumerate() {
            let coords: Vec<usize> = assignment.iter().map(|raw| raw[i]).collect();
            values.push(ev.eval(&coords)?);
        }
        let rhs = m.charge.integrate(&values)?;
        let equal = lhs == rhs;
        rows.push(MeanRow {
            tuples: assignment.clone(),
            lhs,
            rhs,
            equal,
        });
    }
    let holds = rows.iter().all(|r| r.equal);
    Ok(MeanTheoremReport {
        formula: phi.to_string(),
        free_vars: vars,
        rows,
        holds,
    })
}

/// Checks that `map` is an isomorphism from `a` onto `b`: a bijection that
/// preserves the metric exactly and commutes with every interpretation.
/// Returns the list of defects found (empty on success).
pub fn isomorphism_defects(a: &FiniteStructure, b: &FiniteStructure, map: &[usize]) -> Vec<String> {
    let mut defects = Vec::new();
    if a.signature() != b.signature() {
        defects.push("signatures differ".to_string());
        return defects;
    }
    let n = a.size();
    if map.len() != n || b.size() != n {
        defects.push(format!("sizes differ: {} vs {}", n, b.size()));
        return defects;
    }
    let mut hit = vec![false; n];
    for &x in map {
        if x >= n || std::mem::replace(&mut hit[x], true) {
            defects.push("map is not a bijection".to_string());
            return defects;
        }
    }
    let k = a.metric_exponent().lcm(&b.metric_exponent());
    'metric: for x in 0..n {
        for y in 0..n {
            match (a.metric_power(x, y, k), b.metric_power(map[x], map[y], k)) {
                (Ok(u), Ok(v)) if u == v => {}
                _ => {
                    defects.push(format!(
                        "distance not preserved at ({}, {})",
                        a.element_name(x),
                        a.element_name(y)
                    ));
                    break 'metric;
                }
            }
        }
    }
    let sig = a.signature();
    for (ci, c) in sig.constants.iter().enumerate() {
        if map[a.constant(ci)] != b.constant(ci) {
            defects.push(format!("constant `{c}` not preserved"));
        }
    }
    for (fi, f) in sig.functions.iter().enumerate() {
        if let Some(args) = all_tuples(n, f.arity).find(|args| {
            let mapped: Vec<usize> = args.iter().map(|&x| map[x]).collect();
            map[a.function_value(fi, args)] != b.function_value(fi, &mapped)
        }) {
            defects.push(format!(
                "function `{}` does not commute at {:?}",
                f.name, args
            ));
        }
    }
    for (ri, r) in sig.relations.iter().enumerate() {
        if let Some(args) = all_tuples(n, r.arity).find(|args| {
            let mapped: Vec<usize> = args.iter().map(|&x| map[x]).collect();
            a.relation_value(ri, args) != b.relation_value(ri, &mapped)
        }) {
            defects.push(format!("relation `{}` not preserved at {:?}", r.name, args));
        }
    }
    defects
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SentenceRow {
    pub formula: String,
    /// Element names of the assignment, empty for sentences.
    pub at: Vec<String>,
    #[serde(with = "crate::rational::serde_str")]
    pub left: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub right: Rational,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LosReport {
    pub point: usize,
    pub isomorphism_defects: Vec<String>,
    /// `left` is the value in the mean, `right` in factor `point`.
    pub rows: Vec<SentenceRow>,
    pub holds: bool,
}

fn require_sentences(fragment: &[Formula]) -> Result<()> {
    match fragment.iter().find(|f| !f.is_sentence()) {
        Some(f) => domain(format!("`{f}` is not a sentence")),
        None => Ok(()),
    }
}

/// The ultramean under the point mass `δ_j` collapses onto factor `j`:
/// checks the canonical map `[a] ↦ a_j` is an isomorphism and that every
/// sentence, linear or not, takes the same value on both sides.
pub fn los_pointmass_check(
    factors: Vec<FiniteStructure>,
    j: usize,
    fragment: &[Formula],
    opts: MeanOptions,
) -> Result<LosReport> {
    require_sentences(fragment)?;
    let charge = Charge::point_mass(factors.len(), j)?;
    let m = ultramean(factors, charge, opts)?;
    let target = &m.factors[j];
    let map: Vec<usize> = (0..m.class_count())
        .map(|c| m.representative(c)[j])
        .collect();
    let isomorphism_defects = isomorphism_defects(&m.base, target, &map);
    let mut rows = Vec::new();
    for sigma in fragment {
        let left = Evaluator::new(sigma, &m.base, &[])?.eval(&[])?;
        let right = Evaluator::new(sigma, target, &[])?.eval(&[])?;
        rows.push(SentenceRow {
            formula: sigma.to_string(),
            at: vec![],
            equal: left == right,
            left,
            right,
        });
    }
    let holds = isomorphism_defects.is_empty() && rows.iter().all(|r| r.equal);
    Ok(LosReport {
        point: j,
        isomorphism_defects,
        rows,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalReport {
    pub classes: usize,
    /// `left` is the value in `M`, `right` at the diagonal image in `M^μ`.
    pub rows: Vec<SentenceRow>,
    pub holds: bool,
}

/// The diagonal map `a ↦ [a,a,…]` preserves every p-linear formula.
pub fn diagonal_check(
    base: &FiniteStructure,
    charge: Charge,
    fragment: &[Formula],
    opts: MeanOptions,
) -> Result<DiagonalReport> {
    for f in fragment {
        f.require_linear(opts.p)?;
    }
    let width = charge.len();
    let m = powermean(base, charge, opts)?;
    let diag: Vec<usize> = (0..base.size())
        .map(|a| m.class_of(&vec![a; width]))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for phi in fragment {
        let vars = phi.free_vars();
        let here = Evaluator::new(phi, base, &vars)?;
        let there = Evaluator::new(phi, &m.base, &vars)?;
        for args in all_tuples(base.size(), vars.len()) {
            let left = here.eval(&args)?;
            let images: Vec<usize> = args.iter().map(|&a| diag[a]).collect();
            let right = there.eval(&images)?;
            rows.push(SentenceRow {
                formula: phi.to_string(),
                at: args
                    .iter()
                    .map(|&a| base.element_name(a).to_string())
                    .collect(),
                equal: left == right,
                left,
                right,
            });
        }
    }
    let holds = rows.iter().all(|r| r.equal);
    Ok(DiagonalReport {
        classes: m.class_count(),
        rows,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComposeReport {
    pub left_classes: usize,
    pub right_classes: usize,
    /// Every raw tuple of a class has the same image.
    pub well_defined: bool,
    pub isomorphism_defects: Vec<String>,
    /// Largest deviation between root metrics, for `p > 1` reporting.
    pub max_root_deviation: f64,
    /// `left` in `M^{μ⊗ν}`, `right` at the image in `(M^μ)^ν`.
    pub rows: Vec<SentenceRow>,
    pub holds: bool,
}

/// Builds `M^{μ⊗ν}` and `(M^μ)^ν` and checks that `[a_ij] ↦ [[a^j]_μ]_ν`
/// is an isomorphism preserving every formula of the fragment.
pub fn compose_check(
    base: &FiniteStructure,
    mu: &Charge,
    nu: &Charge,
    fragment: &[Formula],
    opts: MeanOptions,
) -> Result<ComposeReport> {
    let (ni, nj) = (mu.len(), nu.len());
    let left = powermean(base, mu.product(nu), opts)?;
    let inner = powermean(base, mu.clone(), opts)?;
    let right = powermean(inner.base(), nu.clone(), opts)?;
    let image = |raw: &[usize]| -> Result<usize> {
        let outer: Vec<usize> = (0..nj)
            .map(|j| {
                let column: Vec<usize> = (0..ni).map(|i| raw[i * nj + j]).collect();
                inner.class_of(&column)
            })
            .collect::<Result<_>>()?;
        right.class_of(&outer)
    };
    let map: Vec<usize> = (0..left.class_count())
        .map(|c| image(left.representative(c)))
        .collect::<Result<_>>()?;
    let mut well_defined = true;
    for raw in left.raw_tuples() {
        if image(&raw)? != map[left.class_of(&raw)?] {
            well_defined = false;
            break;
        }
    }
    let isomorphism_defects = isomorphism_defects(left.base(), right.base(), &map);
    let mut max_root_deviation = 0.0f64;
    if isomorphism_defects.is_empty() {
        for x in 0..left.class_count() {
            for y in 0..left.class_count() {
                let dev = (left.base().distance_f64(x, y)
                    - right.base().distance_f64(map[x], map[y]))
                .abs();
                max_root_deviation = max_root_deviation.max(dev);
            }
        }
    }
    let mut rows = Vec::new();
    if isomorphism_defects.is_empty() {
        for phi in fragment {
            let vars = phi.free_vars();
            let l = Evaluator::new(phi, left.base(), &vars)?;
            let r = Evaluator::new(phi, right.base(), &vars)?;
            for args in all_tuples(left.class_count(), vars.len()) {
                let lv = l.eval(&args)?;
                let mapped: Vec<usize> = args.iter().map(|&a| map[a]).collect();
                let rv = r.eval(&mapped)?;
                rows.push(SentenceRow {
                    formula: phi.to_string(),
                    at: args
                        .iter()
                        .map(|&a| left.base().element_name(a).to_string())
                        .collect(),
                    equal: lv == rv,
                    left: lv,
                    right: rv,
                });
            }
        }
    }
    let holds = well_defined
        && isomorphism_defects.is_empty()
        && max_root_deviation <= crate::structure::ROOT_TOLERANCE
        && rows.iter().all(|r| r.equal);
    Ok(ComposeReport {
        left_classes: left.class_count(),
        right_classes: right.class_count(),
        well_defined,
        isomorphism_defects,
        max_root_deviation,
        rows,
        holds,
    })
}

/// Raw tuple count of a prospective mean, for callers that want to check the cap first.
pub fn raw_tuple_count(sizes: &[usize]) -> u128 {
    sizes
        .iter()
        .try_fold(1u128, |acc, &n| acc.checked_mul(n as u128))
        .unwrap_or(u128::MAX)
}

pub(crate) fn format_tuple(m: &MeanStructure, raw: &[usize]) -> String {
    let names: Vec<&str> = raw
        .iter()
        .zip(m.factors())
        .map(|(&a, f)| f.element_name(a))
        .collect();
    format!("({})", names.join(","))
}
