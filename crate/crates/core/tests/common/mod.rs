#![allow(dead_code)]

use meanlogic::formula::parse;
use meanlogic::gen::Generator;
use meanlogic::rational::int;
use meanlogic::signature::RelationSymbol;
use meanlogic::{FiniteStructure, Formula, Modulus, PNorm, Rational, Signature};

/// Constant `c` (optional) and a unary `R` bounded by 1 with identity modulus.
pub fn unary_sig(with_constant: bool) -> Signature {
    let constants = if with_constant {
        vec!["c".to_string()]
    } else {
        vec![]
    };
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

pub fn discrete(sig: &Signature, rs: Vec<Rational>) -> FiniteStructure {
    let n = rs.len();
    let metric = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { int(0) } else { int(1) })
                .collect()
        })
        .collect();
    let constants = sig.constants.iter().map(|_| 0).collect();
    FiniteStructure::from_parts(
        sig.clone(),
        (0..n).map(|i| format!("a{i}")).collect(),
        metric,
        1,
        constants,
        vec![],
        vec![rs],
    )
    .unwrap()
}

/// Two points at distance 1 with `R = (0, 1)` and `c = a0`.
pub fn a() -> FiniteStructure {
    discrete(&unary_sig(true), vec![int(0), int(1)])
}

pub fn point(r: Rational) -> FiniteStructure {
    let s = discrete(&unary_sig(true), vec![r]);
    s.relabeled(vec!["e".into()]).unwrap()
}

pub fn f(text: &str, sig: &Signature) -> Formula {
    parse(text, sig).unwrap()
}

/// A random formula that may use `min`/`max` and arbitrary metric exponents.
pub fn continuous_formula(
    g: &mut Generator,
    sig: &Signature,
    free: &[String],
    depth: usize,
    p: PNorm,
) -> Formula {
    let a = g.linear_formula(sig, free, depth, 3, p);
    match g.below(4) {
        0 => a,
        1 => Formula::meet(a, g.linear_formula(sig, free, depth, 3, p)),
        2 => Formula::join(a, g.linear_formula(sig, free, depth, 3, p)),
        _ => Formula::sup(
            "w",
            Formula::meet(
                a,
                Formula::metric(
                    meanlogic::Term::var("w"),
                    meanlogic::Term::var(free.first().map(String::as_str).unwrap_or("w")),
                    2,
                ),
            ),
        ),
    }
}
