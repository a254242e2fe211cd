//! Seeded random instances: signatures, structures, charges and linear formulas.
//!
//! Structures put every off-diagonal distance in `[1/2, 1]`, so the triangle
//! inequality holds automatically and the generated moduli (which reach
//! their caps by `t = 1/2`) are always respected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charge::Charge;
use crate::error::Result;
use crate::formula::{Formula, Term};
use crate::mean::{raw_assignments, ultramean, MeanOptions, MeanStructure};
use crate::rational::{int, ratio, Rational};
use crate::signature::{FunctionSymbol, Modulus, Piece, RelationSymbol, Signature};
use crate::structure::{table_len, FiniteStructure, PNorm};

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    /// A rational `k/den` with `k` uniform in `lo..=hi`.
    pub fn grid(&mut self, lo: i64, hi: i64, den: i64) -> Rational {
        ratio(self.rng.random_range(lo..=hi), den)
    }

    /// Constant `c`, unary `R`, and optionally a binary `S` and a unary `f`.
    pub fn signature(&mut self) -> Signature {
        let mut relations = Vec::new();
        let b = int(self.rng.random_range(1..=2));
        relations.push(relation("R", 1, &b));
        if self.chance(0.5) {
            relations.push(relation("S", 2, &b));
        }
        let mut functions = Vec::new();
        if self.chance(0.5) {
            functions.push(FunctionSymbol {
                name: "f".into(),
                arity: 1,
                modulus: Modulus::new(vec![Piece::new(int(2), int(0)), Piece::new(int(0), int(1))])
                    .expect("valid modulus"),
            });
        }
        Signature::new(vec!["c".into()], functions, relations).expect("valid signature")
    }

    pub fn structure(&mut self, sig: &Signature, n: usize) -> FiniteStructure {
        let mut metric = vec![vec![int(0); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.grid(3, 6, 6);
                metric[i][j] = d.clone();
                metric[j][i] = d;
            }
        }
        let constants = sig.constants.iter().map(|_| self.below(n)).collect();
        let functions = sig
            .functions
            .iter()
            .map(|f| (0..table_len(n, f.arity)).map(|_| self.below(n)).collect())
            .collect();
        let relations = sig
            .relations
            .iter()
            .map(|r| {
                let b = r.bound.to_integer().try_into().unwrap_or(1i64);
                (0..table_len(n, r.arity))
                    .map(|_| self.grid(-4 * b, 4 * b, 4))
                    .collect()
            })
            .collect();
        FiniteStructure::from_parts(
            sig.clone(),
            (0..n).map(|i| format!("a{i}")).collect(),
            metric,
            1,
            constants,
            functions,
            relations,
        )
        .expect("generated structure is well formed")
    }

    /// Weights `k_i / Σk` with `k_i ∈ 0..=4`, at least one positive.
    pub fn charge(&mut self, n: usize) -> Charge {
        loop {
            let ks: Vec<i64> = (0..n).map(|_| self.rng.random_range(0..=4)).collect();
            let total: i64 = ks.iter().sum();
            if total > 0 {
                return Charge::from_weights(ks.iter().map(|&k| ratio(k, total)).collect())
                    .expect("normalized");
            }
        }
    }

    /// Weights with every entry positive.
    pub fn positive_charge(&mut self, n: usize) -> Charge {
        let ks: Vec<i64> = (0..n).map(|_| self.rng.random_range(1..=5)).collect();
        let total: i64 = ks.iter().sum();
        Charge::from_weights(ks.iter().map(|&k| ratio(k, total)).collect()).expect("normalized")
    }

    fn term(&mut self, sig: &Signature, scope: &[String]) -> Term {
        let base = if !scope.is_empty() && (sig.constants.is_empty() || self.chance(0.8)) {
            Term::Var(scope[self.below(scope.len())].clone())
        } else if !sig.constants.is_empty() {
            Term::Const(sig.constants[self.below(sig.constants.len())].clone())
        } else {
            return Term::Var("x".into());
        };
        match sig.functions.first() {
            Some(f) if f.arity == 1 && self.chance(0.25) => Term::Apply(f.name.clone(), vec![base]),
            _ => base,
        }
    }

    fn atom(&mut self, sig: &Signature, scope: &[String], p: PNorm) -> Formula {
        let roll = self.below(10);
        if roll < 1 {
            return Formula::Const(self.grid(-2, 2, 2));
        }
        if roll < 4 {
            return Formula::Metric(self.term(sig, scope), self.term(sig, scope), p.get());
        }
        let r = &sig.relations[self.below(sig.relations.len())];
        let args = (0..r.arity).map(|_| self.term(sig, scope)).collect();
        Formula::Rel(r.name.clone(), args)
    }

    fn build(
        &mut self,
        sig: &Signature,
        scope: &mut Vec<String>,
        quantifiers: usize,
        size: usize,
        p: PNorm,
    ) -> Formula {
        if quantifiers > 0 && self.chance(0.6) {
            let v = format!("z{}", scope.len());
            scope.push(v.clone());
            let body = self.build(sig, scope, quantifiers - 1, size, p);
            scope.pop();
            return if self.chance(0.5) {
                Formula::sup(&v, body)
            } else {
                Formula::inf(&v, body)
            };
        }
        if size <= 1 {
            return self.atom(sig, scope, p);
        }
        match self.below(3) {
            0 => {
                let r = self.grid(-4, 4, 2);
                Formula::Scale(
                    r,
                    Box::new(self.build(sig, scope, quantifiers, size - 1, p)),
                )
            }
            _ => {
                let left = self.below(size - 1) + 1;
                let a = self.build(sig, scope, quantifiers, left, p);
                let b = self.build(sig, scope, quantifiers.saturating_sub(1), size - left, p);
                Formula::sum(a, b)
            }
        }
    }

    /// A random p-linear formula whose free variables are among `free`, with
    /// quantifier depth at most `max_depth` and about `size` connectives.
    pub fn linear_formula(
        &mut self,
        sig: &Signature,
        free: &[String],
        max_depth: usize,
        size: usize,
        p: PNorm,
    ) -> Formula {
        let mut scope = free.to_vec();
        self.build(sig, &mut scope, max_depth, size.max(1), p)
    }
}

/// A random ultramean with a linear formula and the raw-tuple assignments to check.
pub struct MeanInstance {
    pub mean: MeanStructure,
    pub formula: Formula,
    pub tuples: Vec<Vec<Vec<usize>>>,
}

/// Bound on `classes^(quantifier depth) × assignments`, keeping each instance quick.
const WORK_BUDGET: u128 = 200_000;

impl Generator {
    /// Up to 4 factors of up to 4 points (at most 64 raw tuples), a random
    /// charge, a formula of quantifier depth at most 3 with up to two free
    /// variables, and the first 50 raw-tuple assignments.
    pub fn mean_instance(&mut self, p: PNorm) -> Result<MeanInstance> {
        let sig = self.signature();
        let sizes = loop {
            let k = self.below(4) + 1;
            let sizes: Vec<usize> = (0..k).map(|_| self.below(4) + 1).collect();
            if sizes.iter().product::<usize>() <= 64 {
                break sizes;
            }
        };
        let factors: Vec<FiniteStructure> =
            sizes.iter().map(|&n| self.structure(&sig, n)).collect();
        let charge = self.charge(sizes.len());
        let mean = ultramean(factors, charge, MeanOptions::with_p(p))?;
        let free: Vec<String> = ["x", "y"][..self.below(3)]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let assignments = (mean.raw_count() as u128).pow(free.len() as u32).min(50);
        let classes = mean.class_count() as u128;
        let mut depth = 0;
        while depth < 3 && classes.pow(depth as u32 + 1) * assignments <= WORK_BUDGET {
            depth += 1;
        }
        let max_depth = self.below(depth + 1);
        let size = self.below(6) + 1;
        let formula = self.linear_formula(&sig, &free, max_depth, size, p);
        let tuples = raw_assignments(&mean, formula.free_vars().len(), 50);
        Ok(MeanInstance {
            mean,
            formula,
            tuples,
        })
    }
}

fn relation(name: &str, arity: usize, bound: &Rational) -> RelationSymbol {
    RelationSymbol {
        name: name.into(),
        arity,
        bound: bound.clone(),
        modulus: Modulus::capped(bound * int(4), bound * int(2)).expect("valid modulus"),
    }
}
