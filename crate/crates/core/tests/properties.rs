//! Seeded property tests over the core algebra.

mod common;

use common::*;
use meanlogic::approx::{build_theory_points, chebyshev_fit};
use meanlogic::charge::fubini_check;
use meanlogic::formula::{enumerate_fragment, eval_with, infer_gauge, parse, FragmentSpec};
use meanlogic::gen::Generator;
use meanlogic::mean::{powermean, ultramean, verify_mean_theorem, MeanOptions};
use meanlogic::rational::{int, ratio, to_f64};
use meanlogic::structure::{all_tuples, product_distance_p};
use meanlogic::types::{
    back_and_forth, equiv_check_sentences, extreme_types, game_sentences, realize_convex_type,
    realized_types, Fragment, TypeVector,
};
use meanlogic::{Charge, Formula, PNorm, Rational};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn xy() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let sig = g.signature();
        let p = PNorm::new(1 + g.below(2) as u32).unwrap();
        let phi = continuous_formula(&mut g, &sig, &xy(), 2, p);
        let text = phi.to_string();
        prop_assert_eq!(parse(&text, &sig).unwrap(), phi);
    }

    #[test]
    fn gauge_bounds_every_pair(seed in any::<u64>(), p in 1u32..=2) {
        let mut g = Generator::new(seed);
        let sig = g.signature();
        let p = PNorm::new(p).unwrap();
        let phi = continuous_formula(&mut g, &sig, &xy(), 1, p);
        let n = g.below(3) + 2;
        let s = g.structure(&sig, n);
        let gauge = infer_gauge(&phi, &sig, p).unwrap();
        let vars = phi.free_vars();
        let values: Vec<(Vec<usize>, Rational)> = all_tuples(n, vars.len())
            .map(|t| {
                let v = eval_with(&phi, &s, &vars, &t).unwrap();
                (t, v)
            })
            .collect();
        for (a, va) in &values {
            prop_assert!(va.abs() <= gauge.bound, "|{}| exceeds bound {}", va, gauge.bound);
            for (b, vb) in &values {
                let gap = (va - vb).abs();
                let d = product_distance_p(&s, a, b, p).unwrap();
                if p == PNorm::ONE {
                    prop_assert!(gap <= gauge.joint.eval(&d.exact).unwrap());
                } else {
                    prop_assert!(to_f64(&gap) <= gauge.joint.eval_f64(d.root) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn sup_inf_duality_and_linear_closure(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let sig = g.signature();
        let size = g.below(3) + 1;
        let s = g.structure(&sig, size);
        let body = g.linear_formula(&sig, &["x".into()], 1, 3, PNorm::ONE);
        let other = g.linear_formula(&sig, &[], 1, 3, PNorm::ONE);
        let sup = Formula::sup("x", body.clone());
        let dual = Formula::scale(int(-1), Formula::inf("x", Formula::scale(int(-1), body)));
        prop_assert_eq!(eval_with(&sup, &s, &[], &[]).unwrap(), eval_with(&dual, &s, &[], &[]).unwrap());
        let r = g.grid(-4, 4, 3);
        let combo = Formula::sum(Formula::scale(r.clone(), sup.clone()), other.clone());
        prop_assert!(combo.is_linear(PNorm::ONE));
        prop_assert!(!Formula::meet(sup.clone(), other.clone()).is_linear(PNorm::ONE));
        let lhs = eval_with(&combo, &s, &[], &[]).unwrap();
        let rhs = r * eval_with(&sup, &s, &[], &[]).unwrap() + eval_with(&other, &s, &[], &[]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn change_of_variables(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let n = g.below(5) + 1;
        let k = g.below(4) + 1;
        let mu = g.charge(n);
        let map: Vec<usize> = (0..n).map(|_| g.below(k)).collect();
        let h: Vec<Rational> = (0..k).map(|_| g.grid(-8, 8, 3)).collect();
        let image = mu.pushforward(&map, (0..k).map(|j| j.to_string()).collect()).unwrap();
        let pulled: Vec<Rational> = map.iter().map(|&j| h[j].clone()).collect();
        prop_assert_eq!(mu.integrate(&pulled).unwrap(), image.integrate(&h).unwrap());
    }

    #[test]
    fn fubini(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let (a, b) = (g.below(4) + 1, g.below(4) + 1);
        let (mu, nu) = (g.charge(a), g.charge(b));
        let f: Vec<Vec<Rational>> = (0..a).map(|_| (0..b).map(|_| g.grid(-6, 6, 5)).collect()).collect();
        let (lhs, rhs) = fubini_check(&f, &mu, &nu).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_associative_and_projections(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let (a, b, c) = (g.below(3) + 1, g.below(3) + 1, g.below(3) + 1);
        let (mu, nu, rho) = (g.charge(a), g.charge(b), g.charge(c));
        let left = mu.product(&nu).product(&rho);
        let right = mu.product(&nu.product(&rho));
        prop_assert_eq!(left.weights(), right.weights());
        let prod = mu.product(&nu);
        let first: Vec<usize> = (0..a * b).map(|k| k / b).collect();
        let second: Vec<usize> = (0..a * b).map(|k| k % b).collect();
        prop_assert_eq!(prod.pushforward(&first, mu.index().to_vec()).unwrap(), mu.clone());
        prop_assert_eq!(prod.pushforward(&second, nu.index().to_vec()).unwrap(), nu);
    }

    #[test]
    fn extremality_witness_recombines(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let size = g.below(5) + 1;
        let mu = g.charge(size);
        match mu.is_extreme() {
            meanlogic::charge::Extremality::Extreme { point } => prop_assert!(mu.weight(point).is_one()),
            meanlogic::charge::Extremality::Decomposable { epsilon, first, second } => {
                prop_assert!(epsilon > Rational::zero() && epsilon < Rational::one());
                prop_assert_ne!(&first, &second);
                prop_assert_eq!(Charge::convex_combine(&epsilon, &first, &second).unwrap(), mu);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mean_theorem_and_quotient(seed in any::<u64>(), p in 1u32..=2) {
        let mut g = Generator::new(seed);
        let inst = g.mean_instance(PNorm::new(p).unwrap()).unwrap();
        let report = verify_mean_theorem(&inst.mean, &inst.formula, &inst.tuples).unwrap();
        prop_assert!(report.holds, "{:?}", report.rows.iter().find(|r| !r.equal));
        // members of a class integrate every relation atom and distance to the same value
        let m = &inst.mean;
        let sig = m.base().signature().clone();
        let atoms: Vec<Formula> = sig
            .relations
            .iter()
            .filter(|r| r.arity == 1)
            .map(|r| parse(&format!("{}(x)", r.name), &sig).unwrap())
            .chain([parse(&format!("d(x,c)^{p}"), &sig).unwrap()])
            .collect();
        for class in m.members() {
            for atom in &atoms {
                let rows: Vec<Vec<Vec<usize>>> = class.iter().map(|raw| vec![raw.clone()]).collect();
                let r = verify_mean_theorem(m, atom, &rows).unwrap();
                prop_assert!(r.holds);
                prop_assert!(r.rows.windows(2).all(|w| w[0].rhs == w[1].rhs));
            }
        }
    }

    #[test]
    fn realized_combination_lies_in_hull(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let sig = unary_sig(true);
        let n = g.below(2) + 2;
        let rs = (0..n).map(|_| g.grid(0, 4, 4)).collect();
        let m = discrete(&sig, rs);
        let fragment = Fragment::new(
            vec![parse("R(x)", &sig).unwrap(), parse("d(x,c)", &sig).unwrap(), parse("sup y. d(x,y)", &sig).unwrap()],
            PNorm::ONE,
        )
        .unwrap();
        let weights = g.charge(n);
        let real = realize_convex_type(&m, &weights, &fragment, MeanOptions::default()).unwrap();
        prop_assert_eq!(&real.vector, &real.expected);
        let mut vectors: Vec<TypeVector> = realized_types(&m, &fragment, 1).unwrap().into_iter().map(|(_, v)| v).collect();
        vectors.push(real.vector.clone());
        let verdicts = extreme_types(&vectors).unwrap();
        let fresh = verdicts.last().unwrap();
        let is_original = vectors[..vectors.len() - 1].contains(&real.vector);
        prop_assert!(is_original || !fresh.is_extreme());
    }

    #[test]
    fn theory_points_are_affine(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let sig = unary_sig(true);
        let corpus: Vec<_> = (0..3).map(|_| {
            let n = g.below(2) + 1;
            discrete(&sig, (0..n).map(|_| g.grid(-4, 4, 4)).collect())
        }).collect();
        let basis: Vec<Formula> = vec![
            parse("1", &sig).unwrap(),
            parse("R(c)", &sig).unwrap(),
            parse("sup x. R(x)", &sig).unwrap(),
            parse("inf x. sup y. d(x,y) + R(y)", &sig).unwrap(),
        ];
        let eps = g.grid(0, 4, 4);
        let (i, j) = (g.below(3), g.below(3));
        let pts = build_theory_points(&corpus, &basis, &[(eps.clone(), i, j)], MeanOptions::default()).unwrap();
        let mixed = &pts[3].values;
        for k in 0..basis.len() {
            let expect = &eps * &pts[i].values[k] + (Rational::one() - &eps) * &pts[j].values[k];
            prop_assert_eq!(&mixed[k], &expect);
        }
    }

    #[test]
    fn fit_monotone_and_exact(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let sig = unary_sig(true);
        let corpus: Vec<_> = (0..5).map(|_| point(g.grid(0, 8, 8))).collect();
        let target = parse("min(R(c), 1 + -1*R(c))", &sig).unwrap();
        let small = vec![parse("1", &sig).unwrap()];
        let large = vec![parse("1", &sig).unwrap(), parse("R(c)", &sig).unwrap()];
        let pts = build_theory_points(&corpus, &large, &[], MeanOptions::default()).unwrap();
        let e_small = chebyshev_fit(&target, &small, &pts).unwrap().epsilon;
        let e_large = chebyshev_fit(&target, &large, &pts).unwrap().epsilon;
        prop_assert!(e_large <= e_small);
        let fewer = chebyshev_fit(&target, &large, &pts[..3]).unwrap().epsilon;
        prop_assert!(fewer <= e_large);
        let lin = parse("1 + 2*R(c)", &sig).unwrap();
        prop_assert_eq!(chebyshev_fit(&lin, &large, &pts).unwrap().epsilon, Rational::zero());
    }

    #[test]
    fn game_success_is_sound(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let sig = unary_sig(false);
        let grid = [int(0), int(1)];
        let m = discrete(&sig, (0..g.below(2) + 2).map(|_| g.grid(0, 1, 1)).collect());
        let n = if g.chance(0.5) {
            let mut perm: Vec<usize> = (0..m.size()).collect();
            perm.reverse();
            m.permuted(&perm).unwrap()
        } else {
            discrete(&sig, (0..g.below(2) + 2).map(|_| g.grid(0, 1, 1)).collect())
        };
        let fragment = Fragment::with_vars(vec![parse("R(x)", &sig).unwrap()], vec!["x".into()], PNorm::ONE, false).unwrap();
        let report = back_and_forth(&m, &n, &fragment, 2).unwrap();
        if report.success() {
            let sentences = game_sentences(&fragment, &sig, 2, 2, &grid).unwrap();
            let equiv = equiv_check_sentences(&m, &n, &sentences).unwrap();
            prop_assert!(equiv.counterexample.is_none(), "{:?}", equiv.counterexample);
        }
    }
}

/// Sentences over unary `R` without constants, depth 2, two atoms, grid {-1,0,1}.
///
/// With `k` bound variables there are `N(k) = k + C(k,2)` atoms; a matrix picks
/// between one and two of them, each with one of `g = 2` nonzero coefficients,
/// and must mention every bound variable. Inclusion-exclusion over the set of
/// unmentioned variables counts the matrices, and each has `2^k` prefixes.
#[test]
fn enumeration_count_matches_inclusion_exclusion() {
    fn choose(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    let atoms = |j: u64| j + choose(j, 2);
    let (depth, max_atoms, g) = (2u64, 2u64, 2u64);
    let mut expected = 0i64;
    for k in 1..=depth {
        let mut matrices = 0i64;
        for s in 0..=k {
            let inner: u64 = (1..=max_atoms)
                .map(|m| choose(atoms(k - s), m) * g.pow(m as u32))
                .sum();
            let sign = if s % 2 == 0 { 1 } else { -1 };
            matrices += sign * (choose(k, s) * inner) as i64;
        }
        expected += matrices * (1 << k);
    }
    assert_eq!(expected, 60);
    let spec = FragmentSpec {
        depth: 2,
        max_atoms: 2,
        grid: vec![int(-1), int(0), int(1)],
        free_vars: vec![],
        lattice: false,
        term_depth: 0,
    };
    let got = enumerate_fragment(&spec, &unary_sig(false), PNorm::ONE).unwrap();
    assert_eq!(got.len() as i64, expected);
    let mut dedup = got.clone();
    dedup.sort_by_key(|f| f.to_string());
    dedup.dedup();
    assert_eq!(dedup.len(), got.len());
}

#[test]
fn point_masses_collapse_powermean() {
    let m = a();
    let mean = powermean(
        &m,
        Charge::point_mass(3, 1).unwrap(),
        MeanOptions::default(),
    )
    .unwrap();
    assert_eq!(mean.class_count(), m.size());
    let uniform = ultramean(
        vec![m.clone(), m.clone()],
        Charge::uniform(2).unwrap(),
        MeanOptions::default(),
    )
    .unwrap();
    assert_eq!(uniform.class_count(), 4);
    let r = verify_mean_theorem(
        &uniform,
        &parse("R(x) + d(x,c)", m.signature()).unwrap(),
        &[vec![vec![0, 1]]],
    )
    .unwrap();
    assert_eq!(r.rows[0].lhs, ratio(1, 1));
}
