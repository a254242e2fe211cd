//! Theory points of a corpus and best sup-norm approximation of a sentence
//! by affine combinations of linear sentences.

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::formula::{Evaluator, Formula};
use crate::lp::{solve, LinearProgram, LpOutcome, Sense, VarKind};
use crate::mean::{convex_combination, MeanOptions};
use crate::rational::{self, Rational};
use crate::structure::FiniteStructure;

/// A structure together with the values it gives a sentence basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoryPoint {
    pub label: String,
    pub structure: FiniteStructure,
    pub values: Vec<Rational>,
}

impl Serialize for TheoryPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("label", &self.label)?;
        let values: Vec<String> = self.values.iter().map(rational::format).collect();
        m.serialize_entry("values", &values)?;
        m.end()
    }
}

fn sentence_value(f: &Formula, s: &FiniteStructure) -> Result<Rational> {
    if !f.is_sentence() {
        return domain(format!("`{f}` is not a sentence"));
    }
    Evaluator::new(f, s, &[])?.eval(&[])
}

fn values(basis: &[Formula], s: &FiniteStructure) -> Result<Vec<Rational>> {
    basis.iter().map(|f| sentence_value(f, s)).collect()
}

/// Evaluates `basis` on each corpus structure, then on `εM_i + (1−ε)M_j`
/// for each closure triple `(ε, i, j)`.
pub fn build_theory_points(
    corpus: &[FiniteStructure],
    basis: &[Formula],
    closure: &[(Rational, usize, usize)],
    opts: MeanOptions,
) -> Result<Vec<TheoryPoint>> {
    if let Some(first) = corpus.first() {
        if corpus.iter().any(|s| s.signature() != first.signature()) {
            return Err(Error::Signature(
                "corpus structures have different signatures".into(),
            ));
        }
    }
    let mut points = Vec::with_capacity(corpus.len() + closure.len());
    for (i, s) in corpus.iter().enumerate() {
        points.push(TheoryPoint {
            label: format!("M{i}"),
            structure: s.clone(),
            values: values(basis, s)?,
        });
    }
    for (eps, i, j) in closure {
        let (Some(a), Some(b)) = (corpus.get(*i), corpus.get(*j)) else {
            return domain(format!(
                "closure refers to a structure outside the corpus: ({i}, {j})"
            ));
        };
        let m = convex_combination(eps, a, b, opts)?;
        let s = m.base().clone();
        points.push(TheoryPoint {
            label: format!(
                "{}*M{i}+{}*M{j}",
                rational::format(eps),
                rational::format(&(Rational::one() - eps))
            ),
            values: values(basis, &s)?,
            structure: s,
        });
    }
    Ok(points)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreservedRow {
    #[serde(with = "crate::rational::serde_str")]
    pub epsilon: Rational,
    /// `φ` in the convex combination.
    #[serde(with = "crate::rational::serde_str")]
    pub mean: Rational,
    /// `εφ^M + (1−ε)φ^N`.
    #[serde(with = "crate::rational::serde_str")]
    pub integral: Rational,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreservedReport {
    pub formula: String,
    pub rows: Vec<PreservedRow>,
    pub passes: bool,
}

/// Compares `φ^{εM+(1−ε)N}` with `εφ^M + (1−ε)φ^N` on each triple.
pub fn check_preserved(
    phi: &Formula,
    triples: &[(Rational, FiniteStructure, FiniteStructure)],
    opts: MeanOptions,
) -> Result<PreservedReport> {
    if !phi.is_sentence() {
        return domain(format!("`{phi}` is not a sentence"));
    }
    let mut rows = Vec::with_capacity(triples.len());
    for (eps, m, n) in triples {
        let mean = convex_combination(eps, m, n, opts)?;
        let lhs = sentence_value(phi, mean.base())?;
        let rhs = eps * sentence_value(phi, m)? + (Rational::one() - eps) * sentence_value(phi, n)?;
        rows.push(PreservedRow {
            epsilon: eps.clone(),
            equal: lhs == rhs,
            mean: lhs,
            integral: rhs,
        });
    }
    let passes = rows.iter().all(|r| r.equal);
    Ok(PreservedReport {
        formula: phi.to_string(),
        rows,
        passes,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitReport {
    pub epsilon: Rational,
    /// Basis formula (as printed) and its coefficient, in basis order.
    pub coefficients: Vec<(String, Rational)>,
    /// Point label and `target − fit` at that point.
    pub residuals: Vec<(String, Rational)>,
}

impl Serialize for FitReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Coeffs<'a>(&'a [(String, Rational)]);
        impl Serialize for Coeffs<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    m.serialize_entry(k, &rational::format(v))?;
                }
                m.end()
            }
        }
        #[derive(Serialize)]
        struct Residual<'a> {
            point: &'a str,
            residual: String,
        }
        let residuals: Vec<Residual<'_>> = self
            .residuals
            .iter()
            .map(|(p, r)| Residual {
                point: p,
                residual: rational::format(r),
            })
            .collect();
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("epsilon", &rational::format(&self.epsilon))?;
        m.serialize_entry("coefficients", &Coeffs(&self.coefficients))?;
        m.serialize_entry("residuals", &residuals)?;
        m.end()
    }
}

/// Minimizes `max_k |target(M_k) − Σ_j c_j·basis_j(M_k)|` over the points, exactly.
pub fn chebyshev_fit(
    target: &Formula,
    basis: &[Formula],
    points: &[TheoryPoint],
) -> Result<FitReport> {
    if points.is_empty() {
        return domain("chebyshev_fit needs at least one point");
    }
    if !target.is_sentence() {
        return domain(format!("target `{target}` is not a sentence"));
    }
    if !basis.iter().any(|b| *b == Formula::Const(Rational::one())) {
        return domain("the basis must contain the constant sentence 1");
    }
    let t: Vec<Rational> = points
        .iter()
        .map(|p| sentence_value(target, &p.structure))
        .collect::<Result<_>>()?;
    let b: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| values(basis, &p.structure))
        .collect::<Result<_>>()?;
    let m = basis.len();
    // variables: c_1..c_m free, ε ≥ 0 last
    let mut objective = vec![Rational::zero(); m + 1];
    objective[m] = Rational::one();
    let mut kinds = vec![VarKind::Free; m];
    kinds.push(VarKind::NonNeg);
    let mut lp = LinearProgram::new(crate::lp::Direction::Minimize, objective, kinds);
    for (tk, bk) in t.iter().zip(&b) {
        let mut upper = bk.clone();
        upper.push(-Rational::one());
        lp.constrain(upper, Sense::Le, tk.clone());
        let mut lower: Vec<Rational> = bk.iter().map(|x| -x).collect();
        lower.push(-Rational::one());
        lp.constrain(lower, Sense::Le, -tk);
    }
    let LpOutcome::Optimal { value, point } = solve(&lp)? else {
        return Err(Error::Internal(
            "Chebyshev program must be feasible and bounded".into(),
        ));
    };
    let coeffs = &point[..m];
    let residuals: Vec<(String, Rational)> = points
        .iter()
        .zip(t.iter().zip(&b))
        .map(|(p, (tk, bk))| {
            let fit: Rational = coeffs.iter().zip(bk).map(|(c, x)| c * x).sum();
            (p.label.clone(), tk - fit)
        })
        .collect();
    let worst = residuals
        .iter()
        .map(|(_, r)| r.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    if worst != value {
        return Err(Error::Internal(format!(
            "fit error {worst} differs from LP optimum {value}"
        )));
    }
    Ok(FitReport {
        epsilon: value,
        coefficients: basis
            .iter()
            .map(|f| f.to_string())
            .zip(coeffs.iter().cloned())
            .collect(),
        residuals,
    })
}
