//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use isomer::conditions::Tableau;
use isomer::exact::{ExactScalar, Rational};
use isomer::trees::Tree;
use num_bigint::BigInt;
use proptest::prelude::*;

/// Parent index of every non-root node, read off the level sequence.
pub fn parents(t: &Tree) -> Vec<Option<usize>> {
    let l = t.levels();
    (0..l.len())
        .map(|i| (0..i).rev().find(|&j| l[j] + 1 == l[i]))
        .collect()
}

/// `Φ(t)` as the full sum over stage labellings: `b` at the root, `a_ij`
/// along every edge from a node labelled `i` to a child labelled `j`.
pub fn phi_brute_force(tab: &Tableau, t: &Tree) -> ExactScalar {
    let par = parents(t);
    let n = par.len();
    let s = tab.stages();
    let mut labels = vec![0usize; n];
    let mut total = ExactScalar::zero();
    loop {
        let mut term = tab.b()[labels[0]].clone();
        for v in 1..n {
            if term.is_zero() {
                break;
            }
            let u = par[v].unwrap();
            term = &term * &tab.a()[labels[u]][labels[v]];
        }
        total = &total + &term;
        let mut k = 0;
        loop {
            if k == n {
                return total;
            }
            labels[k] += 1;
            if labels[k] < s {
                break;
            }
            labels[k] = 0;
            k += 1;
        }
    }
}

fn small_rational() -> impl Strategy<Value = ExactScalar> {
    (-9i64..=9, 1i64..=6).prop_map(|(n, d)| ExactScalar::ratio(n, d))
}

/// Explicit rational tableaus with 1..=4 stages and `c_i = Σ_j a_ij`.
pub fn explicit_tableau() -> impl Strategy<Value = Tableau> {
    (1usize..=4)
        .prop_flat_map(|s| {
            (
                Just(s),
                proptest::collection::vec(small_rational(), s * (s - 1) / 2),
                proptest::collection::vec(small_rational(), s),
            )
        })
        .prop_map(|(s, lower, b)| {
            let mut a = vec![vec![ExactScalar::zero(); s]; s];
            let mut it = lower.into_iter();
            for (i, row) in a.iter_mut().enumerate() {
                for x in row.iter_mut().take(i) {
                    *x = it.next().unwrap();
                }
            }
            let c = a.iter().map(|row| row.iter().cloned().sum()).collect();
            Tableau::new(a, b, c).unwrap()
        })
}

/// Values `a + b√d` with small rational parts.
pub fn exact_scalar(d: u64) -> impl Strategy<Value = ExactScalar> {
    (-50i64..=50, 1i64..=12, -50i64..=50, 1i64..=12).prop_map(move |(an, ad, bn, bd)| {
        ExactScalar::new(
            Rational::new(BigInt::from(an), BigInt::from(ad)),
            Rational::new(BigInt::from(bn), BigInt::from(bd)),
            d,
        )
    })
}

/// Field axioms for three values of `Q(√d)`.
pub fn check_field_axioms(x: &ExactScalar, y: &ExactScalar, z: &ExactScalar) -> Result<(), String> {
    let zero = ExactScalar::zero();
    let one = ExactScalar::one();
    let eq = |l: ExactScalar, r: ExactScalar, what: &str| {
        if l == r {
            Ok(())
        } else {
            Err(format!("{what}: {l} != {r} for x={x}, y={y}, z={z}"))
        }
    };
    eq(x + y, y + x, "additive commutativity")?;
    eq(x * y, y * x, "multiplicative commutativity")?;
    eq(&(x + y) + z, x + &(y + z), "additive associativity")?;
    eq(&(x * y) * z, x * &(y * z), "multiplicative associativity")?;
    eq(x * &(y + z), &(x * y) + &(x * z), "distributivity")?;
    eq(x + &zero, x.clone(), "additive identity")?;
    eq(x * &one, x.clone(), "multiplicative identity")?;
    eq(x + &(-x.clone()), zero.clone(), "additive inverse")?;
    if !x.is_zero() {
        eq(x * &x.inverse().unwrap(), one, "multiplicative inverse")?;
        eq(&(y / x) * x, y.clone(), "division")?;
    } else if x.inverse().is_ok() {
        return Err("zero has an inverse".into());
    }
    Ok(())
}
