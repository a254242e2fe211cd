//! The simplex solver against brute-force vertex enumeration on small boxed programs.

use meanlogic::lp::{solve, Direction, LinearProgram, LpOutcome, Sense, VarKind};
use meanlogic::rational::int;
use meanlogic::Rational;
use num_traits::Zero;
use proptest::prelude::*;

const BOX: i64 = 4;

/// Solves the square system `a·x = b` exactly; None if singular.
fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] * &inv;
                for c in col..n {
                    let sub = &f * &a[col][c];
                    a[r][c] -= sub;
                }
                let sub = &f * &b[col];
                b[r] -= sub;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// All constraints as `row·x ≤ rhs`, including the box.
fn halfspaces(lp: &LinearProgram) -> Vec<(Vec<Rational>, Rational)> {
    let n = lp.variables();
    let mut out = Vec::new();
    for c in &lp.constraints {
        let neg: Vec<Rational> = c.coefficients.iter().map(|x| -x).collect();
        match c.sense {
            Sense::Le => out.push((c.coefficients.clone(), c.rhs.clone())),
            Sense::Ge => out.push((neg, -c.rhs.clone())),
            Sense::Eq => {
                out.push((c.coefficients.clone(), c.rhs.clone()));
                out.push((neg, -c.rhs.clone()));
            }
        }
    }
    for j in 0..n {
        let mut up = vec![Rational::zero(); n];
        up[j] = int(1);
        out.push((up.clone(), int(BOX)));
        let down: Vec<Rational> = up.iter().map(|x| -x).collect();
        let lower = if lp.kinds[j] == VarKind::NonNeg {
            int(0)
        } else {
            int(BOX)
        };
        out.push((down, lower));
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Best objective over feasible vertices; None if there are none.
fn vertex_optimum(lp: &LinearProgram) -> Option<Rational> {
    let n = lp.variables();
    let hs = halfspaces(lp);
    let mut best: Option<Rational> = None;
    for pick in combinations(hs.len(), n) {
        let a = pick.iter().map(|&i| hs[i].0.clone()).collect();
        let b = pick.iter().map(|&i| hs[i].1.clone()).collect();
        let Some(x) = gauss(a, b) else { continue };
        let feasible = hs
            .iter()
            .all(|(row, rhs)| row.iter().zip(&x).map(|(a, v)| a * v).sum::<Rational>() <= *rhs);
        if !feasible {
            continue;
        }
        let v = lp.objective_value(&x);
        best = Some(match (best, lp.direction) {
            (None, _) => v,
            (Some(b), Direction::Maximize) => std::cmp::max(b, v),
            (Some(b), Direction::Minimize) => std::cmp::min(b, v),
        });
    }
    best
}

fn boxed(lp: &mut LinearProgram) {
    let n = lp.variables();
    for j in 0..n {
        let mut row = vec![Rational::zero(); n];
        row[j] = int(1);
        lp.constrain(row.clone(), Sense::Le, int(BOX));
        if lp.kinds[j] == VarKind::Free {
            lp.constrain(row, Sense::Ge, int(-BOX));
        }
    }
}

fn program() -> impl Strategy<Value = LinearProgram> {
    (1usize..=3, 0usize..=3).prop_flat_map(|(n, m)| {
        (
            any::<bool>(),
            prop::collection::vec(-3i64..=3, n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec((prop::collection::vec(-3i64..=3, n), 0u8..3, -4i64..=4), m),
        )
            .prop_map(move |(max, obj, free, rows)| {
                let dir = if max {
                    Direction::Maximize
                } else {
                    Direction::Minimize
                };
                let kinds = free
                    .iter()
                    .map(|&f| if f { VarKind::Free } else { VarKind::NonNeg })
                    .collect();
                let mut lp = LinearProgram::new(dir, obj.into_iter().map(int).collect(), kinds);
                for (coef, sense, rhs) in rows {
                    let sense = [Sense::Le, Sense::Ge, Sense::Eq][sense as usize];
                    lp.constrain(coef.into_iter().map(int).collect(), sense, int(rhs));
                }
                lp
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(mut lp in program()) {
        boxed(&mut lp);
        let oracle = vertex_optimum(&lp);
        match (solve(&lp).unwrap(), oracle) {
            (LpOutcome::Optimal { value, point }, Some(best)) => {
                prop_assert!(lp.is_feasible(&point));
                prop_assert_eq!(lp.objective_value(&point), value.clone());
                prop_assert_eq!(value, best);
            }
            (LpOutcome::Infeasible, None) => {}
            (got, want) => prop_assert!(false, "solver {:?}, oracle {:?}", got, want),
        }
    }

    #[test]
    fn deterministic(lp in program()) {
        prop_assert_eq!(solve(&lp).unwrap(), solve(&lp).unwrap());
    }
}

#[test]
fn documented_instances() {
    let mut lp = LinearProgram::new(Direction::Maximize, vec![int(1)], vec![VarKind::NonNeg]);
    lp.constrain(vec![int(1)], Sense::Le, int(1));
    assert_eq!(
        solve(&lp).unwrap(),
        LpOutcome::Optimal {
            value: int(1),
            point: vec![int(1)]
        }
    );
    let mut lp = LinearProgram::new(Direction::Minimize, vec![int(0)], vec![VarKind::NonNeg]);
    lp.constrain(vec![int(1)], Sense::Ge, int(1));
    lp.constrain(vec![int(1)], Sense::Le, int(0));
    assert_eq!(solve(&lp).unwrap(), LpOutcome::Infeasible);
    let unbounded = LinearProgram::new(Direction::Maximize, vec![int(1)], vec![VarKind::NonNeg]);
    assert_eq!(solve(&unbounded).unwrap(), LpOutcome::Unbounded);
    let mut bad = LinearProgram::new(Direction::Maximize, vec![int(1)], vec![VarKind::NonNeg]);
    bad.constrain(vec![int(1), int(2)], Sense::Le, int(1));
    assert!(solve(&bad).is_err());
}
