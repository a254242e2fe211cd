//! Finite metric structures with exact rational data.
//!
//! The metric is stored as a matrix of exact rationals. Structures read from
//! files store plain distances. Means built with a p-norm for `p > 1` store
//! the exact `p`-th powers `d(a,b)^p` instead, because the distances
//! themselves are usually irrational; [`FiniteStructure::metric_exponent`]
//! records which power is stored.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{structural, Error, Result};
use crate::rational::{self, Rational};
use crate::signature::{Modulus, Signature};

/// Absolute tolerance for inequalities checked on approximate p-th roots.
pub const ROOT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PNorm(u32);

impl PNorm {
    pub const ONE: PNorm = PNorm(1);

    pub fn new(p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::Domain("p must be at least 1".into()));
        }
        Ok(PNorm(p))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl Default for PNorm {
    fn default() -> Self {
        PNorm::ONE
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteStructure {
    signature: Signature,
    universe: Vec<String>,
    metric: Vec<Rational>,
    metric_exponent: u32,
    constants: Vec<usize>,
    functions: Vec<Vec<usize>>,
    relations: Vec<Vec<Rational>>,
}

pub(crate) fn table_len(n: usize, arity: usize) -> usize {
    n.pow(arity as u32)
}

/// Mixed-radix code of a tuple, first coordinate most significant.
pub(crate) fn tuple_code(n: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * n + a)
}

pub(crate) fn decode_tuple(n: usize, arity: usize, mut code: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = code % n;
        code /= n;
    }
    out
}

/// All tuples of `arity` indices below `n`, in lexicographic order.
pub fn all_tuples(n: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..table_len(n, arity)).map(move |c| decode_tuple(n, arity, c))
}

impl FiniteStructure {
    /// Builds a structure from tables aligned with the signature's symbol
    /// order. Table entries are indexed by [`all_tuples`] order.
    pub fn from_parts(
        signature: Signature,
        universe: Vec<String>,
        metric: Vec<Vec<Rational>>,
        metric_exponent: u32,
        constants: Vec<usize>,
        functions: Vec<Vec<usize>>,
        relations: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let n = universe.len();
        if n == 0 {
            return structural("universe must be non-empty");
        }
        let mut names = universe.clone();
        names.sort();
        names.dedup();
        if names.len() != n {
            return structural("universe element names must be distinct");
        }
        if metric_exponent == 0 {
            return structural("metric exponent must be at least 1");
        }
        if metric.len() != n || metric.iter().any(|row| row.len() != n) {
            return structural(format!("metric must be a {n}×{n} matrix"));
        }
        if metric.iter().flatten().any(|q| q.is_negative()) {
            return structural("metric entries must be nonnegative");
        }
        if constants.len() != signature.constants.len() {
            return structural("constant table does not match the signature");
        }
        if constants.iter().any(|&c| c >= n) {
            return structural("constant interpreted outside the universe");
        }
        if functions.len() != signature.functions.len() {
            return structural("function tables do not match the signature");
        }
        for (f, table) in signature.functions.iter().zip(&functions) {
            if table.len() != table_len(n, f.arity) {
                return structural(format!("function `{}` table is not total", f.name));
            }
            if table.iter().any(|&v| v >= n) {
                return structural(format!("function `{}` maps outside the universe", f.name));
            }
        }
        if relations.len() != signature.relations.len() {
            return structural("relation tables do not match the signature");
        }
        for (r, table) in signature.relations.iter().zip(&relations) {
            if table.len() != table_len(n, r.arity) {
                return structural(format!("relation `{}` table is not total", r.name));
            }
        }
        Ok(FiniteStructure {
            signature,
            universe,
            metric: metric.into_iter().flatten().collect(),
            metric_exponent,
            constants,
            functions,
            relations,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.universe.iter().position(|e| e == name)
    }

    pub fn element_name(&self, i: usize) -> &str {
        &self.universe[i]
    }

    /// The power `q` such that stored metric entries equal `d^q`.
    pub fn metric_exponent(&self) -> u32 {
        self.metric_exponent
    }

    pub fn stored_metric(&self, i: usize, j: usize) -> &Rational {
        &self.metric[i * self.size() + j]
    }

    /// `d(i,j)^k`, exactly. Fails with [`Error::Inexact`] when the value is irrational.
    pub fn metric_power(&self, i: usize, j: usize, k: u32) -> Result<Rational> {
        let stored = self.stored_metric(i, j);
        let q = self.metric_exponent;
        if k % q == 0 {
            return Ok(rational::pow(stored, k / q));
        }
        rational::exact_root(&rational::pow(stored, k), q).ok_or_else(|| {
            Error::Inexact(format!(
                "d({},{})^{k} is irrational (stored d^{q} = {stored})",
                self.universe[i], self.universe[j]
            ))
        })
    }

    pub fn distance_f64(&self, i: usize, j: usize) -> f64 {
        rational::root_f64(self.stored_metric(i, j), self.metric_exponent)
    }

    pub fn constant(&self, c: usize) -> usize {
        self.constants[c]
    }

    pub fn function_value(&self, f: usize, args: &[usize]) -> usize {
        self.functions[f][tuple_code(self.size(), args)]
    }

    pub fn relation_value(&self, r: usize, args: &[usize]) -> &Rational {
        &self.relations[r][tuple_code(self.size(), args)]
    }

    pub fn function_table(&self, f: usize) -> &[usize] {
        &self.functions[f]
    }

    pub fn relation_table(&self, r: usize) -> &[Rational] {
        &self.relations[r]
    }

    pub fn constants(&self) -> &[usize] {
        &self.constants
    }

    /// A copy with elements renamed; `names` must be distinct and as many as the universe.
    pub fn relabeled(&self, names: Vec<String>) -> Result<Self> {
        let n = self.size();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| self.stored_metric(i, j).clone()).collect())
            .collect();
        FiniteStructure::from_parts(
            self.signature.clone(),
            names,
            rows,
            self.metric_exponent,
            self.constants.clone(),
            self.functions.clone(),
            self.relations.clone(),
        )
    }

    /// The image of this structure under a permutation `perm` of its universe
    /// (element `i` becomes element `perm[i]`, names travel with elements).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.size();
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if perm.len() != n || sorted.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::Domain("not a permutation of the universe".into()));
        }
        let mut inv = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let universe = (0..n).map(|k| self.universe[inv[k]].clone()).collect();
        let rows = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| self.stored_metric(inv[a], inv[b]).clone())
                    .collect()
            })
            .collect();
        let constants = self.constants.iter().map(|&c| perm[c]).collect();
        let functions = self
            .signature
            .functions
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                all_tuples(n, f.arity)
                    .map(|t| {
                        let pre: Vec<usize> = t.iter().map(|&x| inv[x]).collect();
                        perm[self.function_value(fi, &pre)]
                    })
                    .collect()
            })
            .collect();
        let relations = self
            .signature
            .relations
            .iter()
            .enumerate()
            .map(|(ri, r)| {
                all_tuples(n, r.arity)
                    .map(|t| {
                        let pre: Vec<usize> = t.iter().map(|&x| inv[x]).collect();
                        self.relation_value(ri, &pre).clone()
                    })
                    .collect()
            })
            .collect();
        FiniteStructure::from_parts(
            self.signature.clone(),
            universe,
            rows,
            self.metric_exponent,
            constants,
            functions,
            relations,
        )
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Structural("structure file must be a JSON object".into()))?;
        let signature: Signature = match obj.get("signature") {
            Some(v) => serde_json::from_value(v.clone())?,
            None => return structural("missing `signature`"),
        };
        let universe: Vec<String> = match obj.get("universe") {
            Some(v) => serde_json::from_value(v.clone())?,
            None => return structural("missing `universe`"),
        };
        let n = universe.len();
        let index_of = |name: &Value| -> Result<usize> {
            let s = name
                .as_str()
                .ok_or_else(|| Error::Structural(format!("expected element name, got {name}")))?;
            universe
                .iter()
                .position(|e| e == s)
                .ok_or_else(|| Error::Structural(format!("unknown element `{s}`")))
        };
        let metric_rows: Vec<Vec<String>> = match obj.get("metric") {
            Some(v) => serde_json::from_value(v.clone())?,
            None => return structural("missing `metric`"),
        };
        let metric = metric_rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| rational::parse(t))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let metric_exponent = match obj.get("metric_exponent") {
            None => 1,
            Some(v) => v
                .as_u64()
                .and_then(|k| u32::try_from(k).ok())
                .ok_or_else(|| {
                    Error::Structural("`metric_exponent` must be a positive integer".into())
                })?,
        };
        let empty = Map::new();
        let section = |key: &str| -> Result<&Map<String, Value>> {
            match obj.get(key) {
                None => Ok(&empty),
                Some(Value::Object(m)) => Ok(m),
                Some(_) => structural(format!("`{key}` must be an object")),
            }
        };
        let const_map = section("constants")?;
        let mut constants = Vec::new();
        for c in &signature.constants {
            let v = const_map
                .get(c)
                .ok_or_else(|| Error::Structural(format!("constant `{c}` is not interpreted")))?;
            constants.push(index_of(v)?);
        }
        let fun_map = section("functions")?;
        let mut functions = Vec::new();
        for f in &signature.functions {
            let v = fun_map.get(&f.name).ok_or_else(|| {
                Error::Structural(format!("function `{}` is not interpreted", f.name))
            })?;
            let leaves = flatten_table(v, n, f.arity, &f.name)?;
            functions.push(
                leaves
                    .iter()
                    .map(|l| index_of(l))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let rel_map = section("relations")?;
        let mut relations = Vec::new();
        for r in &signature.relations {
            let v = rel_map.get(&r.name).ok_or_else(|| {
                Error::Structural(format!("relation `{}` is not interpreted", r.name))
            })?;
            let leaves = flatten_table(v, n, r.arity, &r.name)?;
            let values = leaves
                .iter()
                .map(|l| match l.as_str() {
                    Some(t) => rational::parse(t),
                    None => structural(format!(
                        "relation `{}`: expected rational string, got {l}",
                        r.name
                    )),
                })
                .collect::<Result<Vec<_>>>()?;
            relations.push(values);
        }
        for key in obj.keys() {
            if !matches!(
                key.as_str(),
                "signature"
                    | "universe"
                    | "metric"
                    | "metric_exponent"
                    | "constants"
                    | "functions"
                    | "relations"
            ) {
                return structural(format!("unknown field `{key}`"));
            }
        }
        FiniteStructure::from_parts(
            signature,
            universe,
            metric,
            metric_exponent,
            constants,
            functions,
            relations,
        )
    }

    pub fn to_json(&self) -> Value {
        let n = self.size();
        let mut obj = Map::new();
        obj.insert(
            "signature".into(),
            serde_json::to_value(&self.signature).expect("signature serializes"),
        );
        obj.insert("universe".into(), Value::from(self.universe.clone()));
        let metric: Vec<Value> = (0..n)
            .map(|i| {
                Value::from(
                    (0..n)
                        .map(|j| rational::format(self.stored_metric(i, j)))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        obj.insert("metric".into(), Value::from(metric));
        if self.metric_exponent != 1 {
            obj.insert("metric_exponent".into(), Value::from(self.metric_exponent));
        }
        let constants: Map<String, Value> = self
            .signature
            .constants
            .iter()
            .zip(&self.constants)
            .map(|(c, &v)| (c.clone(), Value::from(self.universe[v].clone())))
            .collect();
        obj.insert("constants".into(), Value::Object(constants));
        let functions: Map<String, Value> = self
            .signature
            .functions
            .iter()
            .zip(&self.functions)
            .map(|(f, table)| {
                let leaves: Vec<Value> = table
                    .iter()
                    .map(|&v| Value::from(self.universe[v].clone()))
                    .collect();
                (f.name.clone(), nest_table(&leaves, n, f.arity))
            })
            .collect();
        obj.insert("functions".into(), Value::Object(functions));
        let relations: Map<String, Value> = self
            .signature
            .relations
            .iter()
            .zip(&self.relations)
            .map(|(r, table)| {
                let leaves: Vec<Value> = table
                    .iter()
                    .map(|q| Value::from(rational::format(q)))
                    .collect();
                (r.name.clone(), nest_table(&leaves, n, r.arity))
            })
            .collect();
        obj.insert("relations".into(), Value::Object(relations));
        Value::Object(obj)
    }
}

fn flatten_table<'a>(v: &'a Value, n: usize, arity: usize, name: &str) -> Result<Vec<&'a Value>> {
    if arity == 0 {
        return Ok(vec![v]);
    }
    match v {
        Value::Array(items) if items.len() == n => {
            let mut out = Vec::with_capacity(table_len(n, arity));
            for item in items {
                out.extend(flatten_table(item, n, arity - 1, name)?);
            }
            Ok(out)
        }
        _ => structural(format!(
            "table of `{name}` must be nested arrays of length {n} and depth {arity}"
        )),
    }
}

fn nest_table(leaves: &[Value], n: usize, arity: usize) -> Value {
    if arity == 0 {
        return leaves[0].clone();
    }
    let stride = table_len(n, arity - 1);
    Value::Array(
        (0..n)
            .map(|i| nest_table(&leaves[i * stride..(i + 1) * stride], n, arity - 1))
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductDistance {
    /// `Σ d(x_k, y_k)^p`, exact.
    #[serde(with = "crate::rational::serde_str")]
    pub exact: Rational,
    /// `(Σ d(x_k, y_k)^p)^(1/p)`, approximate.
    pub root: f64,
}

/// The p-product metric on tuples.
pub fn product_distance_p(
    s: &FiniteStructure,
    xs: &[usize],
    ys: &[usize],
    p: PNorm,
) -> Result<ProductDistance> {
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!(
            "tuple lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = s.size();
    if xs.iter().chain(ys).any(|&i| i >= n) {
        return Err(Error::Domain("tuple index outside the universe".into()));
    }
    let mut exact = Rational::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        exact += s.metric_power(x, y, p.get())?;
    }
    let root = rational::root_f64(&exact, p.get());
    Ok(ProductDistance { exact, root })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "symbol", rename_all = "snake_case")]
pub enum Constraint {
    Symmetry,
    ZeroDiagonal,
    PositiveDistance,
    Triangle,
    Diameter,
    RelationBound(String),
    FunctionContinuity(String),
    RelationContinuity(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    /// The first violating instance, as tuples of element names.
    pub witness: Vec<Vec<String>>,
    pub detail: String,
    /// How many instances violate this constraint.
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Collector<'a> {
    s: &'a FiniteStructure,
    report: ValidationReport,
}

impl Collector<'_> {
    fn record(
        &mut self,
        constraint: Constraint,
        witness: &[&[usize]],
        detail: impl FnOnce() -> String,
    ) {
        if let Some(v) = self
            .report
            .violations
            .iter_mut()
            .find(|v| v.constraint == constraint)
        {
            v.count += 1;
            return;
        }
        let witness = witness
            .iter()
            .map(|t| t.iter().map(|&i| self.s.universe[i].clone()).collect())
            .collect();
        self.report.violations.push(Violation {
            constraint,
            witness,
            detail: detail(),
            count: 1,
        });
    }
}

/// Precomputed `d^p` values in exact and approximate form.
struct PowerTable {
    n: usize,
    exact: Option<Vec<Rational>>,
    approx: Vec<f64>,
}

impl PowerTable {
    fn new(s: &FiniteStructure, p: u32) -> Self {
        let n = s.size();
        let exact: Option<Vec<Rational>> = (0..n * n)
            .map(|k| s.metric_power(k / n, k % n, p).ok())
            .collect();
        let approx = match &exact {
            Some(v) => v.iter().map(rational::to_f64).collect(),
            None => (0..n * n)
                .map(|k| s.distance_f64(k / n, k % n).powi(p as i32))
                .collect(),
        };
        PowerTable { n, exact, approx }
    }
}

/// Checks every structural constraint a τ-structure must satisfy for the
/// p-product metric on tuples.
///
/// Exact when `p = 1` and the metric is stored as plain distances;
/// otherwise inequalities between roots are checked with [`ROOT_TOLERANCE`].
pub fn validate_structure(s: &FiniteStructure, p: PNorm) -> ValidationReport {
    let mut c = Collector {
        s,
        report: ValidationReport::default(),
    };
    let n = s.size();
    let q = s.metric_exponent;
    let one = Rational::one();
    for i in 0..n {
        if !s.stored_metric(i, i).is_zero() {
            c.record(Constraint::ZeroDiagonal, &[&[i]], || {
                format!("d({0},{0}) ≠ 0", s.universe[i])
            });
        }
        for j in 0..n {
            let dij = s.stored_metric(i, j);
            if i < j && dij != s.stored_metric(j, i) {
                c.record(Constraint::Symmetry, &[&[i, j]], || {
                    format!("d({0},{1}) ≠ d({1},{0})", s.universe[i], s.universe[j])
                });
            }
            if i != j && dij.is_zero() {
                c.record(Constraint::PositiveDistance, &[&[i, j]], || {
                    format!(
                        "d({},{}) = 0 off the diagonal",
                        s.universe[i], s.universe[j]
                    )
                });
            }
            if *dij > one {
                c.record(Constraint::Diameter, &[&[i, j]], || {
                    format!("d({},{}) > 1", s.universe[i], s.universe[j])
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let violated = if q == 1 {
                    s.stored_metric(i, k) > &(s.stored_metric(i, j) + s.stored_metric(j, k))
                } else {
                    s.distance_f64(i, k)
                        > s.distance_f64(i, j) + s.distance_f64(j, k) + ROOT_TOLERANCE
                };
                if violated {
                    c.record(Constraint::Triangle, &[&[i, j, k]], || {
                        format!(
                            "d({0},{2}) > d({0},{1}) + d({1},{2})",
                            s.universe[i], s.universe[j], s.universe[k]
                        )
                    });
                }
            }
        }
    }
    for (ri, r) in s.signature.relations.iter().enumerate() {
        for (code, v) in s.relations[ri].iter().enumerate() {
            if v.abs() > r.bound {
                let t = decode_tuple(n, r.arity, code);
                c.record(Constraint::RelationBound(r.name.clone()), &[&t], || {
                    format!("|{}| = {} exceeds bound {}", r.name, v.abs(), r.bound)
                });
            }
        }
    }

    let powers = PowerTable::new(s, p.get());
    let exact_mode = p.get() == 1 && q == 1;
    for (fi, f) in s.signature.functions.iter().enumerate() {
        let table = &s.functions[fi];
        check_continuity(
            &mut c,
            &powers,
            p,
            exact_mode,
            f.arity,
            &f.modulus,
            |cx, cy| {
                let (a, b) = (table[cx], table[cy]);
                Lhs {
                    exact: if exact_mode {
                        Some(s.stored_metric(a, b).clone())
                    } else {
                        None
                    },
                    approx: s.distance_f64(a, b),
                }
            },
            Constraint::FunctionContinuity(f.name.clone()),
        );
    }
    for (ri, r) in s.signature.relations.iter().enumerate() {
        let table = &s.relations[ri];
        let approx: Vec<f64> = table.iter().map(rational::to_f64).collect();
        check_continuity(
            &mut c,
            &powers,
            p,
            exact_mode,
            r.arity,
            &r.modulus,
            |cx, cy| Lhs {
                exact: if exact_mode {
                    Some((&table[cx] - &table[cy]).abs())
                } else {
                    None
                },
                approx: (approx[cx] - approx[cy]).abs(),
            },
            Constraint::RelationContinuity(r.name.clone()),
        );
    }
    c.report
}

struct Lhs {
    exact: Option<Rational>,
    approx: f64,
}

fn check_continuity(
    c: &mut Collector<'_>,
    powers: &PowerTable,
    p: PNorm,
    exact_mode: bool,
    arity: usize,
    modulus: &Modulus,
    lhs_of: impl Fn(usize, usize) -> Lhs,
    constraint: Constraint,
) {
    let n = powers.n;
    let total = table_len(n, arity);
    let tuples: Vec<Vec<usize>> = all_tuples(n, arity).collect();
    let pieces: Vec<(f64, f64)> = modulus
        .pieces()
        .iter()
        .map(|pc| (rational::to_f64(&pc.slope), rational::to_f64(&pc.intercept)))
        .collect();
    let lambda = |t: f64| {
        pieces
            .iter()
            .map(|(a, b)| a * t + b)
            .fold(f64::INFINITY, f64::min)
    };
    for cx in 0..total {
        for cy in cx + 1..total {
            let (x, y) = (&tuples[cx], &tuples[cy]);
            let mut lhs = lhs_of(cx, cy);
            let dist_pow: f64 = x
                .iter()
                .zip(y)
                .map(|(&a, &b)| powers.approx[a * n + b])
                .sum();
            let dist = if p.get() == 1 {
                dist_pow
            } else {
                dist_pow.powf(1.0 / p.get() as f64)
            };
            let rhs = lambda(dist);
            let violated = if exact_mode {
                if lhs.approx <= rhs - 1e-6 {
                    false
                } else {
                    let exact = powers.exact.as_ref().expect("exact powers at p = 1");
                    let d: Rational = x.iter().zip(y).map(|(&a, &b)| &exact[a * n + b]).sum();
                    lhs.exact.take().expect("exact lhs") > modulus.eval_unchecked(&d)
                }
            } else {
                lhs.approx > rhs + ROOT_TOLERANCE
            };
            if violated {
                c.record(constraint.clone(), &[x, y], || {
                    format!(
                        "variation {} exceeds modulus value {} at distance {}",
                        lhs.approx, rhs, dist
                    )
                });
            }
        }
    }
}

/// Element names as a map, handy for building assignments.
pub fn element_map(s: &FiniteStructure) -> BTreeMap<String, usize> {
    s.universe
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::signature::{Piece, RelationSymbol};

    fn sig_r(modulus: Modulus) -> Signature {
        Signature::new(
            vec![],
            vec![],
            vec![RelationSymbol {
                name: "R".into(),
                arity: 1,
                bound: int(1),
                modulus,
            }],
        )
        .unwrap()
    }

    fn two_point(modulus: Modulus) -> FiniteStructure {
        FiniteStructure::from_parts(
            sig_r(modulus),
            vec!["a0".into(), "a1".into()],
            vec![vec![int(0), int(1)], vec![int(1), int(0)]],
            1,
            vec![],
            vec![],
            vec![vec![int(0), int(1)]],
        )
        .unwrap()
    }

    #[test]
    fn product_distance_examples() {
        let a = two_point(Modulus::identity());
        let p1 = PNorm::ONE;
        let p2 = PNorm::new(2).unwrap();
        let d = product_distance_p(&a, &[0, 1], &[0, 1], p1).unwrap();
        assert_eq!((d.exact, d.root), (int(0), 0.0));
        let d = product_distance_p(&a, &[0, 0], &[0, 1], p1).unwrap();
        assert_eq!((d.exact, d.root), (int(1), 1.0));
        let d = product_distance_p(&a, &[0, 0], &[0, 1], p2).unwrap();
        assert_eq!((d.exact, d.root), (int(1), 1.0));
        let d = product_distance_p(&a, &[0, 1], &[1, 0], p2).unwrap();
        assert_eq!(d.exact, int(2));
        assert!((d.root - 1.414213562).abs() < 1e-9);
        assert!(matches!(
            product_distance_p(&a, &[0], &[0, 1], p1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn validation_examples() {
        let one = FiniteStructure::from_parts(
            sig_r(Modulus::identity()),
            vec!["e".into()],
            vec![vec![int(0)]],
            1,
            vec![],
            vec![],
            vec![vec![ratio(1, 2)]],
        )
        .unwrap();
        assert!(validate_structure(&one, PNorm::ONE).is_valid());
        assert!(validate_structure(&two_point(Modulus::identity()), PNorm::ONE).is_valid());

        let tight = two_point(Modulus::new(vec![Piece::new(ratio(1, 2), int(0))]).unwrap());
        let report = validate_structure(&tight, PNorm::ONE);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.constraint, Constraint::RelationContinuity("R".into()));
        assert_eq!(
            v.witness,
            vec![vec!["a0".to_string()], vec!["a1".to_string()]]
        );
        // deterministic
        assert_eq!(report, validate_structure(&tight, PNorm::ONE));
    }

    #[test]
    fn metric_violations_are_reported() {
        let s = FiniteStructure::from_parts(
            sig_r(Modulus::linear(int(10))),
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![int(0), ratio(1, 4), int(2)],
                vec![ratio(1, 4), int(0), int(0)],
                vec![int(1), int(0), int(0)],
            ],
            1,
            vec![],
            vec![],
            vec![vec![int(0), int(0), int(3)]],
        )
        .unwrap();
        let kinds: Vec<Constraint> = validate_structure(&s, PNorm::ONE)
            .violations
            .into_iter()
            .map(|v| v.constraint)
            .collect();
        for k in [
            Constraint::Symmetry,
            Constraint::PositiveDistance,
            Constraint::Diameter,
            Constraint::Triangle,
            Constraint::RelationBound("R".into()),
        ] {
            assert!(kinds.contains(&k), "missing {k:?} in {kinds:?}");
        }
    }

    #[test]
    fn structural_errors() {
        let sig = sig_r(Modulus::identity());
        assert!(matches!(
            FiniteStructure::from_parts(
                sig.clone(),
                vec![],
                vec![],
                1,
                vec![],
                vec![],
                vec![vec![]]
            ),
            Err(Error::Structural(_))
        ));
        assert!(matches!(
            FiniteStructure::from_parts(
                sig,
                vec!["a".into()],
                vec![vec![int(0)]],
                1,
                vec![],
                vec![],
                vec![vec![]]
            ),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "signature": {"constants": ["c"],
                          "functions": [{"name": "f", "arity": 1, "modulus": [["1","0"]]}],
                          "relations": [{"name": "S", "arity": 2, "bound": "1", "modulus": [["1","0"]]}]},
            "universe": ["a0", "a1"],
            "metric": [["0", "1/2"], ["1/2", "0"]],
            "constants": {"c": "a1"},
            "functions": {"f": ["a1", "a0"]},
            "relations": {"S": [["0", "1/2"], ["-1/2", "0"]]}
        }"#;
        let s = FiniteStructure::from_json_str(text).unwrap();
        assert_eq!(s.constant(0), 1);
        assert_eq!(s.function_value(0, &[0]), 1);
        assert_eq!(s.relation_value(0, &[1, 0]), &ratio(-1, 2));
        let back = FiniteStructure::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);

        let missing = text.replace(r#""f": ["a1", "a0"]"#, r#""f": ["a1"]"#);
        assert!(matches!(
            FiniteStructure::from_json_str(&missing),
            Err(Error::Structural(_))
        ));
        let unknown = text.replace(r#""c": "a1""#, r#""c": "zz""#);
        assert!(matches!(
            FiniteStructure::from_json_str(&unknown),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn permutation_preserves_data() {
        let a = two_point(Modulus::identity());
        let b = a.permuted(&[1, 0]).unwrap();
        assert_eq!(b.universe(), &["a1".to_string(), "a0".to_string()]);
        assert_eq!(b.relation_value(0, &[0]), &int(1));
    }
}
