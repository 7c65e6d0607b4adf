//! Order conditions for explicit Runge–Kutta tableaus.
//!
//! For a system `y' = f(y)` a method has order `p` when every tree with
//! `|t| ≤ p` satisfies `Φ(t) = 1/t!`. For a scalar non-autonomous problem
//! `y' = f(y, x)` all trees of one isomeric class share an elementary
//! differential, so only the weighted class sums
//! `Σ_{t∈u} (Φ(t) − 1/t!) / σ(t)` have to vanish. A method whose scalar
//! order exceeds its vector order is called ambiguous.
//!
//! All values are exact; zero means zero.
//!
//! `D(1)` is the usual simplifying assumption `Σ_i b_i a_ij = b_j (1 − c_j)`.

mod methods;
mod tableau;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

pub use methods::{builtin, builtin_json, BUILTIN_NAMES};
pub use tableau::{LoadOptions, Tableau, TableauError};

use crate::exact::{ExactScalar, Rational};
use crate::parallel;
use crate::stumps::{self, IsomericClass, StumpSignature};
use crate::trees::{self, named, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionError {
    #[error("scalar order analysis needs c_i = Σ_j a_ij for every row")]
    InconsistentRows,
    #[error("order bound must be at least 1")]
    ZeroOrder,
}

/// `Φ(t)` evaluated bottom-up: a leaf below the root contributes `c`, an
/// inner node contributes `A · (product of its children)`, and the root
/// closes with `bᵀ · (product of its children)`.
pub fn elementary_weight(tab: &Tableau, t: &Tree) -> ExactScalar {
    let levels = t.levels();
    let n = levels.len();
    let s = tab.stages();
    let mut parent = vec![0usize; n];
    let mut last_at = vec![0usize; n];
    for i in 1..n {
        let l = levels[i] as usize;
        last_at[l] = i;
        parent[i] = last_at[l - 1];
    }
    let mut prod: Vec<Option<Vec<ExactScalar>>> = vec![None; n];
    for i in (1..n).rev() {
        let psi = match prod[i].take() {
            None => tab.c().to_vec(),
            Some(p) => (0..s)
                .map(|r| {
                    tab.a()[r]
                        .iter()
                        .zip(&p)
                        .filter(|(a, _)| !a.is_zero())
                        .map(|(a, x)| a * x)
                        .sum()
                })
                .collect(),
        };
        let slot = &mut prod[parent[i]];
        *slot = Some(match slot.take() {
            None => psi,
            Some(acc) => acc.iter().zip(&psi).map(|(x, y)| x * y).collect(),
        });
    }
    match prod[0].take() {
        None => tab.b().iter().cloned().sum(),
        Some(p) => tab.b().iter().zip(&p).map(|(b, x)| b * x).sum(),
    }
}

/// `Φ(t) − 1/t!`.
pub fn tree_residual(tab: &Tableau, t: &Tree) -> ExactScalar {
    let density = ExactScalar::from(&t.density());
    elementary_weight(tab, t) - ExactScalar::one() / density
}

fn inverse_symmetry(t: &Tree) -> ExactScalar {
    ExactScalar::one() / ExactScalar::from(&t.symmetry())
}

/// `Σ_{t∈u} (Φ(t) − 1/t!) / σ(t)` over a class.
pub fn class_residual(tab: &Tableau, class: &IsomericClass) -> ExactScalar {
    class.members.iter().map(|t| tree_residual(tab, t) * inverse_symmetry(t)).sum()
}

/// Per-tree residuals of one order, in enumeration order.
fn residuals_of_order(tab: &Tableau, p: usize) -> Vec<(Tree, ExactScalar)> {
    let trees: Vec<Tree> = trees::enumerate(p).expect("order >= 1").collect();
    parallel::install(|| trees.into_par_iter().map(|t| { let r = tree_residual(tab, &t); (t, r) }).collect())
}

/// Largest `p ≤ max_p` with `Φ(t) = 1/t!` for all `|t| ≤ p`.
pub fn vector_order(tab: &Tableau, max_p: usize) -> usize {
    for p in 1..=max_p {
        if residuals_of_order(tab, p).iter().any(|(_, r)| !r.is_zero()) {
            return p - 1;
        }
    }
    max_p
}

fn class_residuals_of_order(tab: &Tableau, p: usize) -> Vec<(IsomericClass, ExactScalar)> {
    let per_tree: BTreeMap<Tree, ExactScalar> = residuals_of_order(tab, p).into_iter().collect();
    stumps::classes(p)
        .expect("order >= 1")
        .into_iter()
        .map(|class| {
            let r = class.members.iter().map(|t| &per_tree[t] * &inverse_symmetry(t)).sum();
            (class, r)
        })
        .collect()
}

/// Largest `p ≤ max_p` such that every class residual of order `≤ p` vanishes.
pub fn scalar_order(tab: &Tableau, max_p: usize) -> Result<usize, ConditionError> {
    if !tab.rows_consistent() {
        return Err(ConditionError::InconsistentRows);
    }
    for p in 1..=max_p {
        if class_residuals_of_order(tab, p).iter().any(|(_, r)| !r.is_zero()) {
            return Ok(p - 1);
        }
    }
    Ok(max_p)
}

/// What a [`Residual`] is attached to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subject {
    Tree(Tree),
    Class { signature: StumpSignature, members: Vec<Tree> },
}

/// One order-condition discrepancy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub subject: Subject,
    pub order: usize,
    pub degree: usize,
    pub value: ExactScalar,
}

impl Residual {
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_class(&self) -> bool {
        matches!(self.subject, Subject::Class { .. })
    }

    fn sort_key(&self) -> (bool, usize, bool, String) {
        let label = match &self.subject {
            Subject::Tree(t) => t.to_string(),
            Subject::Class { signature, .. } => signature.to_string(),
        };
        (self.is_zero(), self.order, self.is_class(), label)
    }

    pub fn to_json(&self, approx: bool) -> Value {
        let mut v = match &self.subject {
            Subject::Tree(t) => json!({ "kind": "tree", "tree": t }),
            Subject::Class { signature, members } => {
                json!({ "kind": "class", "signature": signature, "members": members })
            }
        };
        v["order"] = json!(self.order);
        v["degree"] = json!(self.degree);
        v["value"] = json!(self.value);
        v["zero"] = json!(self.is_zero());
        if approx {
            v["approx"] = json!(self.value.to_f64());
        }
        v
    }
}

fn sort_residuals(rs: &mut [Residual]) {
    rs.sort_by_cached_key(Residual::sort_key);
}

/// `test(p, q)`: residuals of every tree with `|t| ≤ p` and `δ(t) ≤ q`, plus
/// the class residual of every class whose members pass the same filter.
/// Nonzero entries come first; within each group by order, trees before
/// classes, then by canonical label.
pub fn residual_report(tab: &Tableau, p: usize, q: usize) -> Vec<Residual> {
    let mut out = Vec::new();
    for order in 1..=p {
        let per_tree: BTreeMap<Tree, ExactScalar> = residuals_of_order(tab, order)
            .into_iter()
            .filter(|(t, _)| t.degree() <= q)
            .collect();
        if per_tree.is_empty() {
            continue;
        }
        for class in stumps::classes(order).expect("order >= 1") {
            if !class.members.iter().all(|t| per_tree.contains_key(t)) {
                continue;
            }
            let degree = class.members[0].degree();
            let mut sum = ExactScalar::zero();
            for t in &class.members {
                let r = per_tree[t].clone();
                sum = sum + &r * &inverse_symmetry(t);
                out.push(Residual { subject: Subject::Tree(t.clone()), order, degree, value: r });
            }
            out.push(Residual {
                subject: Subject::Class { signature: class.signature, members: class.members },
                order,
                degree,
                value: sum,
            });
        }
    }
    sort_residuals(&mut out);
    out
}

/// `Σ_i b_i a_ij − b_j (1 − c_j)` for `j = 1..s`; all zero iff `D(1)` holds.
pub fn check_d1(tab: &Tableau) -> Vec<ExactScalar> {
    let s = tab.stages();
    (0..s)
        .map(|j| {
            let lhs: ExactScalar = (0..s).map(|i| &tab.b()[i] * &tab.a()[i][j]).sum();
            let rhs = &tab.b()[j] * &(ExactScalar::one() - &tab.c()[j]);
            lhs - rhs
        })
        .collect()
}

/// How many members of one class have a root with two or more children,
/// the shape `D(1)` cannot reduce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassAudit {
    pub signature: StumpSignature,
    pub order: usize,
    pub members: Vec<Tree>,
    pub not_reducible: usize,
}

impl ClassAudit {
    pub fn flagged(&self) -> bool {
        self.not_reducible >= 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct D1Audit {
    pub max_order: usize,
    pub classes: Vec<ClassAudit>,
}

impl D1Audit {
    pub fn flagged(&self) -> Vec<&ClassAudit> {
        self.classes.iter().filter(|c| c.flagged()).collect()
    }

    pub fn to_json(&self) -> Value {
        let classes: Vec<Value> = self
            .classes
            .iter()
            .filter(|c| c.members.len() > 1)
            .map(|c| {
                json!({
                    "order": c.order,
                    "signature": c.signature,
                    "members": c.members,
                    "not_reducible": c.not_reducible,
                    "flagged": c.flagged(),
                })
            })
            .collect();
        json!({ "max_order": self.max_order, "flagged": self.flagged().len(), "classes": classes })
    }
}

/// Audits every class of order `≤ p`. With at most one irreducible member
/// per class, a method satisfying `D(1)` cannot separate scalar from vector
/// order up to `p`.
pub fn d1_class_audit(p: usize) -> D1Audit {
    let classes = (1..=p)
        .flat_map(|order| stumps::classes(order).expect("order >= 1"))
        .map(|class| {
            let not_reducible = class.members.iter().filter(|t| t.root_degree() >= 2).count();
            ClassAudit { order: class.order(), signature: class.signature, members: class.members, not_reducible }
        })
        .collect();
    D1Audit { max_order: p, classes }
}

/// Everything known about a tableau's order up to some bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderReport {
    pub max_order: usize,
    pub vector_order: usize,
    pub scalar_order: usize,
    pub ambiguous: bool,
    /// `Φ([τ,[[τ]]]) − 1/30` when the vector order is exactly 4 and only
    /// that order-5 isomeric pair is unsatisfied.
    pub g: Option<ExactScalar>,
    pub d1_residuals: Vec<ExactScalar>,
    /// Nonzero residuals from the first failing vector order up to the
    /// first failing scalar order (both capped at `max_order`).
    pub failing: Vec<Residual>,
}

impl OrderReport {
    pub fn d1_holds(&self) -> bool {
        self.d1_residuals.iter().all(ExactScalar::is_zero)
    }

    pub fn to_json(&self, approx: bool) -> Value {
        let mut v = json!({
            "max_order": self.max_order,
            "vector_order": self.vector_order,
            "scalar_order": self.scalar_order,
            "ambiguous": self.ambiguous,
            "g": self.g,
            "d1": if self.d1_holds() { "holds" } else { "failed" },
            "d1_residuals": self.d1_residuals,
            "failing": self.failing.iter().map(|r| r.to_json(approx)).collect::<Vec<_>>(),
        });
        if approx {
            v["g_approx"] = json!(self.g.as_ref().map(ExactScalar::to_f64));
        }
        v
    }

    pub fn to_text(&self, approx: bool) -> String {
        let fmt_value = |x: &ExactScalar| {
            if approx {
                format!("{x} (≈ {:.6e})", x.to_f64())
            } else {
                x.to_string()
            }
        };
        let mut out = String::new();
        out.push_str(&format!("max_order={}\n", self.max_order));
        out.push_str(&format!("vector_order={}\n", self.vector_order));
        out.push_str(&format!("scalar_order={}\n", self.scalar_order));
        out.push_str(&format!("ambiguous={}\n", self.ambiguous));
        if let Some(g) = &self.g {
            out.push_str(&format!("g={}\n", fmt_value(g)));
        }
        let d1_nonzero = self.d1_residuals.iter().filter(|x| !x.is_zero()).count();
        if self.d1_holds() {
            out.push_str("d1=holds\n");
        } else {
            out.push_str(&format!("d1=failed ({d1_nonzero} of {} stages)\n", self.d1_residuals.len()));
        }
        for r in &self.failing {
            match &r.subject {
                Subject::Tree(t) => out.push_str(&format!("tree  p={} {t} residual={}\n", r.order, fmt_value(&r.value))),
                Subject::Class { signature, .. } => {
                    out.push_str(&format!("class p={} {signature} residual={}\n", r.order, fmt_value(&r.value)))
                }
            }
        }
        out
    }
}

/// Vector and scalar order, the ambiguity verdict, `g`, `D(1)` and the
/// conditions that separate the two orders.
pub fn order_report(tab: &Tableau, max_p: usize) -> Result<OrderReport, ConditionError> {
    if max_p == 0 {
        return Err(ConditionError::ZeroOrder);
    }
    if !tab.rows_consistent() {
        return Err(ConditionError::InconsistentRows);
    }
    let mut vector = None;
    let mut scalar = None;
    let mut failing = Vec::new();
    let mut order5: Vec<(Tree, ExactScalar)> = Vec::new();
    for p in 1..=max_p {
        let per_tree = residuals_of_order(tab, p);
        if p == 5 {
            order5 = per_tree.iter().filter(|(_, r)| !r.is_zero()).cloned().collect();
        }
        let tree_fail = per_tree.iter().any(|(_, r)| !r.is_zero());
        if tree_fail && vector.is_none() {
            vector = Some(p - 1);
        }
        let by_tree: BTreeMap<Tree, ExactScalar> = per_tree.into_iter().collect();
        let mut class_fail = false;
        for class in stumps::classes(p).expect("order >= 1") {
            let sum: ExactScalar = class.members.iter().map(|t| &by_tree[t] * &inverse_symmetry(t)).sum();
            if vector.is_some() {
                let degree = class.members[0].degree();
                for t in &class.members {
                    if !by_tree[t].is_zero() {
                        failing.push(Residual { subject: Subject::Tree(t.clone()), order: p, degree, value: by_tree[t].clone() });
                    }
                }
                if !sum.is_zero() {
                    failing.push(Residual {
                        subject: Subject::Class { signature: class.signature.clone(), members: class.members.clone() },
                        order: p,
                        degree,
                        value: sum.clone(),
                    });
                }
            }
            class_fail |= !sum.is_zero();
        }
        if class_fail {
            scalar = Some(p - 1);
            break;
        }
    }
    let vector_order = vector.unwrap_or(max_p);
    let scalar_order = scalar.unwrap_or(max_p);
    let g = if vector_order == 4 && max_p >= 5 {
        let t12 = named::tree(named::T12);
        let t15 = named::tree(named::T15);
        let only_pair = order5.iter().all(|(t, _)| *t == t12 || *t == t15);
        order5.iter().find(|(t, _)| *t == t12).filter(|_| only_pair).map(|(_, r)| r.clone())
    } else {
        None
    };
    sort_residuals(&mut failing);
    Ok(OrderReport {
        max_order: max_p,
        vector_order,
        scalar_order,
        ambiguous: scalar_order > vector_order,
        g,
        d1_residuals: check_d1(tab),
        failing,
    })
}

/// Rational `1/t!` as an exact scalar; exposed for reports and tests.
pub fn inverse_density(t: &Tree) -> ExactScalar {
    let d = t.density();
    ExactScalar::rational(Rational::new(1.into(), num_bigint::BigInt::from(d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stumps::factorize;
    use crate::trees::parse_tree;

    fn tree(s: &str) -> Tree {
        parse_tree(s).unwrap()
    }

    #[test]
    fn rk4_weights() {
        let rk4 = builtin("rk4").unwrap();
        assert_eq!(elementary_weight(&rk4, &Tree::leaf()), ExactScalar::one());
        assert_eq!(elementary_weight(&rk4, &tree("[[[]]]")), ExactScalar::ratio(1, 6));
        for lit in [named::T1, named::T2, named::T3, named::T4, named::T5, named::T6, named::T7, named::T8] {
            let t = tree(lit);
            assert_eq!(elementary_weight(&rk4, &t), inverse_density(&t), "{lit}");
        }
    }

    #[test]
    fn rk4_orders() {
        let rk4 = builtin("rk4").unwrap();
        assert_eq!(vector_order(&rk4, 6), 4);
        assert_eq!(scalar_order(&rk4, 6).unwrap(), 4);
        let euler = builtin("euler").unwrap();
        assert_eq!(vector_order(&euler, 3), 1);
        assert_eq!(scalar_order(&euler, 3).unwrap(), 1);
    }

    #[test]
    fn fake5_pair_sums_to_seven_over_120() {
        let tab = builtin("fake5").unwrap();
        let sum = elementary_weight(&tab, &tree(named::T12)) + elementary_weight(&tab, &tree(named::T15));
        assert_eq!(sum, ExactScalar::ratio(7, 120));
        assert_ne!(elementary_weight(&tab, &tree(named::T12)), ExactScalar::ratio(1, 30));
    }

    #[test]
    fn fake5_orders_and_g() {
        let tab = builtin("fake5").unwrap();
        assert_eq!(vector_order(&tab, 6), 4);
        assert_eq!(scalar_order(&tab, 6).unwrap(), 5);
        let report = order_report(&tab, 6).unwrap();
        assert!(report.ambiguous);
        let g = report.g.clone().unwrap();
        assert!(!g.is_zero());
        assert_eq!(g, elementary_weight(&tab, &tree(named::T12)) - ExactScalar::ratio(1, 30));
        assert!(!report.d1_holds());
    }

    #[test]
    fn fake6_orders() {
        let tab = builtin("fake6").unwrap();
        assert_eq!(vector_order(&tab, 7), 5);
        assert_eq!(scalar_order(&tab, 7).unwrap(), 6);
        assert!(order_report(&tab, 7).unwrap().g.is_none());
    }

    #[test]
    fn test_4_1_on_fake5() {
        let tab = builtin("fake5").unwrap();
        let report = residual_report(&tab, 4, 1);
        let trees: Vec<String> = report
            .iter()
            .filter_map(|r| match &r.subject {
                Subject::Tree(t) => Some(t.to_string()),
                _ => None,
            })
            .collect();
        assert_eq!(trees, ["[]", "[[]]", "[[],[]]", "[[],[],[]]"]);
        assert!(report.iter().all(Residual::is_zero));
    }

    #[test]
    fn test_5_3_on_fake5() {
        let tab = builtin("fake5").unwrap();
        let report = residual_report(&tab, 5, 3);
        let nonzero: Vec<&Residual> = report.iter().filter(|r| !r.is_zero()).collect();
        assert_eq!(nonzero.len(), 2);
        assert_eq!(nonzero[0].value, -nonzero[1].value.clone());
        let class = report
            .iter()
            .find(|r| matches!(&r.subject, Subject::Class { signature, .. } if *signature == StumpSignature::from_pairs(&[(1, 0), (0, 1), (1, 1)])))
            .unwrap();
        assert!(class.is_zero());
        assert!(report.iter().all(|r| r.degree <= 3 && r.order <= 5));
        // chain of 5 has degree 4 and is filtered out
        assert!(!report.iter().any(|r| r.subject == Subject::Tree(Tree::chain(5))));
    }

    #[test]
    fn test_1_0_on_euler() {
        let report = residual_report(&builtin("euler").unwrap(), 1, 0);
        assert_eq!(report.len(), 2);
        assert!(report.iter().all(Residual::is_zero));
        assert_eq!(report[0].subject, Subject::Tree(Tree::leaf()));
    }

    #[test]
    fn singleton_class_residual_is_scaled_tree_residual() {
        let tab = builtin("fake5").unwrap();
        for class in stumps::classes(6).unwrap().into_iter().filter(|c| c.members.len() == 1) {
            let t = &class.members[0];
            assert_eq!(class_residual(&tab, &class), tree_residual(&tab, t) * inverse_symmetry(t));
            assert_eq!(factorize(t), class.signature);
        }
    }

    #[test]
    fn d1_examples() {
        let euler = builtin("euler").unwrap();
        assert_eq!(check_d1(&euler), vec![ExactScalar::from_integer(-1)]);
        for name in ["fake5", "fake6"] {
            assert!(!check_d1(&builtin(name).unwrap()).iter().all(ExactScalar::is_zero), "{name}");
        }
    }

    #[test]
    fn d1_audit() {
        assert!(d1_class_audit(4).flagged().is_empty());
        assert!(d1_class_audit(6).flagged().is_empty());
        let audit = d1_class_audit(7);
        let flagged: Vec<&StumpSignature> = audit.flagged().iter().map(|c| &c.signature).collect();
        assert!(flagged.contains(&&StumpSignature::from_pairs(&[(1, 0), (1, 0), (0, 1), (0, 1), (0, 2)])));
    }

    #[test]
    fn inconsistent_rows_refuse_scalar_analysis() {
        let doc = json!({"s": 2, "c": ["0", "1/2"], "A": [[], ["1/3"]], "b": ["0", "1"]});
        let tab = Tableau::from_json(&doc, LoadOptions { allow_inconsistent_rows: true }).unwrap();
        assert_eq!(scalar_order(&tab, 3), Err(ConditionError::InconsistentRows));
        // Φ([τ]) still uses the stated c
        assert_eq!(elementary_weight(&tab, &tree("[[]]")), ExactScalar::ratio(1, 2));
        let _ = vector_order(&tab, 3);
    }
}
