//! Probability charges on finite index sets.
//!
//! On a finite index set every subset is measurable and a charge is just a
//! nonnegative weight vector summing to 1. Ultrafilters are the point masses.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::{self, Rational};
use crate::structure::PNorm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Charge {
    index: Vec<String>,
    #[serde(with = "crate::rational::serde_vec")]
    weights: Vec<Rational>,
}

#[derive(Deserialize)]
struct RawCharge {
    index: Vec<String>,
    #[serde(with = "crate::rational::serde_vec")]
    weights: Vec<Rational>,
}

impl<'de> Deserialize<'de> for Charge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawCharge::deserialize(d)?;
        Charge::new(raw.index, raw.weights).map_err(serde::de::Error::custom)
    }
}

/// Outcome of [`Charge::is_extreme`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Extremality {
    /// A point mass at `point`.
    Extreme { point: usize },
    /// `μ = ε·first + (1−ε)·second` with `first ≠ second`.
    Decomposable {
        #[serde(with = "crate::rational::serde_str")]
        epsilon: Rational,
        first: Charge,
        second: Charge,
    },
}

impl Charge {
    pub fn new(index: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        if index.is_empty() {
            return domain("a charge needs a non-empty index set");
        }
        if index.len() != weights.len() {
            return domain(format!(
                "{} index labels but {} weights",
                index.len(),
                weights.len()
            ));
        }
        let mut labels = index.clone();
        labels.sort();
        labels.dedup();
        if labels.len() != index.len() {
            return domain("charge index labels must be distinct");
        }
        if weights.iter().any(|w| w.is_negative()) {
            return domain("charge weights must be nonnegative");
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return domain(format!("charge weights sum to {total}, not 1"));
        }
        Ok(Charge { index, weights })
    }

    /// Builds a charge on indices labelled `0..n`.
    pub fn from_weights(weights: Vec<Rational>) -> Result<Self> {
        let index = (0..weights.len()).map(|i| i.to_string()).collect();
        Charge::new(index, weights)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("uniform charge on an empty set");
        }
        Charge::from_weights(vec![rational::ratio(1, n as i64); n])
    }

    pub fn point_mass(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return domain(format!("point {j} outside index set of size {n}"));
        }
        let mut w = vec![Rational::zero(); n];
        w[j] = Rational::one();
        Charge::from_weights(w)
    }

    pub fn index(&self) -> &[String] {
        &self.index
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    /// Indices of positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.weights[i].is_positive())
            .collect()
    }

    /// The charge of a set of indices.
    pub fn measure(&self, subset: &[usize]) -> Result<Rational> {
        let mut seen = vec![false; self.len()];
        let mut total = Rational::zero();
        for &i in subset {
            if i >= self.len() {
                return domain(format!("index {i} outside the charge's index set"));
            }
            if !std::mem::replace(&mut seen[i], true) {
                total += &self.weights[i];
            }
        }
        Ok(total)
    }

    /// `∫ f dμ = Σ_i f(i)·μ(i)`.
    pub fn integrate(&self, f: &[Rational]) -> Result<Rational> {
        if f.len() != self.len() {
            return domain(format!(
                "integrand has {} values, index set has {}",
                f.len(),
                self.len()
            ));
        }
        Ok(f.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }

    /// `(∫|f|^p dμ, (∫|f|^p dμ)^(1/p))`.
    pub fn p_norm(&self, f: &[Rational], p: PNorm) -> Result<(Rational, f64)> {
        let powered: Vec<Rational> = f.iter().map(|v| rational::pow(&v.abs(), p.get())).collect();
        let exact = self.integrate(&powered)?;
        let root = rational::root_f64(&exact, p.get());
        Ok((exact, root))
    }

    /// The image charge `f(μ)` on `codomain`, with `f(μ)(j) = μ(f⁻¹(j))`.
    pub fn pushforward(&self, f: &[usize], codomain: Vec<String>) -> Result<Charge> {
        if f.len() != self.len() {
            return domain("pushforward map is not total on the index set");
        }
        let mut w = vec![Rational::zero(); codomain.len()];
        for (i, &j) in f.iter().enumerate() {
            let slot = w.get_mut(j).ok_or_else(|| {
                Error::Domain(format!("map sends index {i} outside the codomain"))
            })?;
            *slot += &self.weights[i];
        }
        Charge::new(codomain, w)
    }

    /// `μ ⊗ ν` on `I × J`, ordered with `I` major.
    pub fn product(&self, other: &Charge) -> Charge {
        let mut index = Vec::with_capacity(self.len() * other.len());
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for (a, wa) in self.index.iter().zip(&self.weights) {
            for (b, wb) in other.index.iter().zip(&other.weights) {
                index.push(format!("({a},{b})"));
                weights.push(wa * wb);
            }
        }
        Charge { index, weights }
    }

    /// `εμ + (1−ε)ν` on a shared index set.
    pub fn convex_combine(epsilon: &Rational, mu: &Charge, nu: &Charge) -> Result<Charge> {
        if mu.index != nu.index {
            return domain("convex combination of charges on different index sets");
        }
        if epsilon.is_negative() || *epsilon > Rational::one() {
            return domain(format!("ε = {epsilon} is outside [0,1]"));
        }
        let rest = Rational::one() - epsilon;
        let weights = mu
            .weights
            .iter()
            .zip(&nu.weights)
            .map(|(a, b)| epsilon * a + &rest * b)
            .collect();
        Ok(Charge {
            index: mu.index.clone(),
            weights,
        })
    }

    /// Decides whether the charge is extreme in the simplex of charges.
    ///
    /// A non-extreme charge is split by conditioning on `Y = {j}` and its
    /// complement, where `j` is the first index with weight strictly
    /// between 0 and 1.
    pub fn is_extreme(&self) -> Extremality {
        if let Some(point) = self.weights.iter().position(|w| w.is_one()) {
            return Extremality::Extreme { point };
        }
        let j = self
            .weights
            .iter()
            .position(|w| w.is_positive())
            .expect("weights sum to 1");
        let epsilon = self.weights[j].clone();
        let mut first = vec![Rational::zero(); self.len()];
        first[j] = Rational::one();
        let rest = Rational::one() - &epsilon;
        let second = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| if i == j { Rational::zero() } else { w / &rest })
            .collect();
        Extremality::Decomposable {
            epsilon,
            first: Charge {
                index: self.index.clone(),
                weights: first,
            },
            second: Charge {
                index: self.index.clone(),
                weights: second,
            },
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawCharge = serde_json::from_str(text)?;
        Charge::new(raw.index, raw.weights)
    }
}

/// Both sides of the finite Fubini identity for `f` on `I × J` (rows indexed by `I`).
pub fn fubini_check(f: &[Vec<Rational>], mu: &Charge, nu: &Charge) -> Result<(Rational, Rational)> {
    if f.len() != mu.len() || f.iter().any(|row| row.len() != nu.len()) {
        return domain("integrand is not total on I × J");
    }
    let flat: Vec<Rational> = f.iter().flatten().cloned().collect();
    let lhs = mu.product(nu).integrate(&flat)?;
    let inner: Vec<Rational> = (0..nu.len())
        .map(|j| {
            let column: Vec<Rational> = f.iter().map(|row| row[j].clone()).collect();
            mu.integrate(&column)
        })
        .collect::<Result<_>>()?;
    let rhs = nu.integrate(&inner)?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn w(v: &[(i64, i64)]) -> Charge {
        Charge::from_weights(v.iter().map(|&(a, b)| ratio(a, b)).collect()).unwrap()
    }

    #[test]
    fn construction() {
        assert!(Charge::from_weights(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(Charge::from_weights(vec![ratio(3, 2), ratio(-1, 2)]).is_err());
        assert!(Charge::from_weights(vec![]).is_err());
        assert!(Charge::new(vec!["a".into(), "a".into()], vec![ratio(1, 2), ratio(1, 2)]).is_err());
        let c: Charge =
            serde_json::from_str(r#"{"index": ["a","b"], "weights": ["1/3","2/3"]}"#).unwrap();
        assert_eq!(c.weight(1), &ratio(2, 3));
    }

    #[test]
    fn integrate_examples() {
        let f = vec![int(7), int(-2), int(5)];
        assert_eq!(
            Charge::point_mass(3, 1).unwrap().integrate(&f).unwrap(),
            int(-2)
        );
        assert_eq!(
            Charge::uniform(2)
                .unwrap()
                .integrate(&[int(0), int(1)])
                .unwrap(),
            ratio(1, 2)
        );
        assert_eq!(
            w(&[(1, 3), (2, 3)]).integrate(&[int(3), int(-3)]).unwrap(),
            int(-1)
        );
        assert!(w(&[(1, 3), (2, 3)]).integrate(&[int(3)]).is_err());
    }

    #[test]
    fn p_norm_examples() {
        let u = Charge::uniform(2).unwrap();
        assert_eq!(
            u.p_norm(&[int(0), int(0)], PNorm::ONE).unwrap(),
            (int(0), 0.0)
        );
        let (e, r) = u.p_norm(&[int(0), int(1)], PNorm::new(2).unwrap()).unwrap();
        assert_eq!(e, ratio(1, 2));
        assert!((r - 0.7071067812).abs() < 1e-10);
        let f = [ratio(-1, 2), int(1)];
        assert_eq!(
            u.p_norm(&f, PNorm::ONE).unwrap().0,
            u.integrate(&[ratio(1, 2), int(1)]).unwrap()
        );
    }

    #[test]
    fn pushforward_examples() {
        let mu = w(&[(1, 2), (1, 4), (1, 4)]);
        let labels = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        assert_eq!(mu.pushforward(&[0, 1, 2], labels(3)).unwrap(), mu);
        let nu = mu.pushforward(&[0, 1, 1], labels(2)).unwrap();
        assert_eq!(nu.weights(), &[ratio(1, 2), ratio(1, 2)]);
        let h = [int(0), int(1)];
        let hf = [int(0), int(1), int(1)];
        assert_eq!(nu.integrate(&h).unwrap(), ratio(1, 2));
        assert_eq!(mu.integrate(&hf).unwrap(), ratio(1, 2));
        assert!(mu.pushforward(&[0, 1], labels(2)).is_err());
        assert!(mu.pushforward(&[0, 1, 5], labels(2)).is_err());
    }

    #[test]
    fn product_examples() {
        let d = Charge::point_mass(2, 1)
            .unwrap()
            .product(&Charge::point_mass(3, 2).unwrap());
        assert_eq!(d.weights().iter().position(|x| x.is_one()), Some(5));
        let u = Charge::uniform(2).unwrap();
        assert_eq!(
            u.product(&u).weights(),
            Charge::uniform(4).unwrap().weights()
        );
        let p = w(&[(1, 3), (2, 3)]).product(&w(&[(1, 4), (3, 4)]));
        assert_eq!(
            p.weights(),
            &[ratio(1, 12), ratio(1, 4), ratio(1, 6), ratio(1, 2)]
        );
    }

    #[test]
    fn convex_examples() {
        let d0 = Charge::point_mass(2, 0).unwrap();
        let d1 = Charge::point_mass(2, 1).unwrap();
        assert_eq!(Charge::convex_combine(&int(1), &d0, &d1).unwrap(), d0);
        assert_eq!(
            Charge::convex_combine(&ratio(1, 2), &d0, &d1).unwrap(),
            Charge::uniform(2).unwrap()
        );
        assert_eq!(
            Charge::convex_combine(&ratio(1, 3), &d0, &d1)
                .unwrap()
                .weights(),
            &[ratio(1, 3), ratio(2, 3)]
        );
        assert!(Charge::convex_combine(&int(2), &d0, &d1).is_err());
        assert!(Charge::convex_combine(&ratio(1, 2), &d0, &Charge::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn extremality_examples() {
        assert_eq!(
            Charge::point_mass(3, 2).unwrap().is_extreme(),
            Extremality::Extreme { point: 2 }
        );
        let d0 = Charge::point_mass(2, 0).unwrap();
        let d1 = Charge::point_mass(2, 1).unwrap();
        assert_eq!(
            Charge::uniform(2).unwrap().is_extreme(),
            Extremality::Decomposable {
                epsilon: ratio(1, 2),
                first: d0.clone(),
                second: d1.clone()
            }
        );
        assert_eq!(
            w(&[(1, 4), (3, 4)]).is_extreme(),
            Extremality::Decomposable {
                epsilon: ratio(1, 4),
                first: d0,
                second: d1
            }
        );
    }

    #[test]
    fn fubini_examples() {
        let u = Charge::uniform(2).unwrap();
        let c = vec![vec![int(5), int(5)], vec![int(5), int(5)]];
        assert_eq!(fubini_check(&c, &u, &u).unwrap(), (int(5), int(5)));
        let f = vec![vec![int(0), int(1)], vec![int(1), int(1)]];
        assert_eq!(
            fubini_check(&f, &u, &u).unwrap(),
            (ratio(3, 4), ratio(3, 4))
        );
    }

    #[test]
    fn measure_is_additive() {
        let mu = w(&[(1, 2), (1, 8), (3, 8)]);
        assert_eq!(
            mu.measure(&[0, 2]).unwrap(),
            mu.measure(&[0]).unwrap() + mu.measure(&[2]).unwrap()
        );
        assert_eq!(mu.measure(&[0, 0]).unwrap(), ratio(1, 2));
        assert!(mu.measure(&[3]).is_err());
    }
}
