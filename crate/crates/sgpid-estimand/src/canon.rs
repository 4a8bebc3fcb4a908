//! Semantics-preserving simplification to a canonical form.
//!
//! Rules are applied bottom-up until nothing changes, in two phases. The
//! first phase merges chain-rule pairs only inside sums, after leaf
//! variables have been summed away; the second also merges them in every
//! product. Collapsing leaves first makes the result independent of which
//! superfluous factors the input carried.
//!
//! Rules:
//! - nested products are flattened, constant factors dropped, children sorted;
//! - `p(H1 | H2, G) p(H2 | G)` merges into `p(H1, H2 | G)`;
//! - sums drop variables absent from their body, absorb directly nested
//!   sums, and pull out factors that do not mention a summed variable;
//! - a summed variable that appears only as the sole head of one observed
//!   conditional is summed away together with that factor, and a sum of a
//!   single observed conditional over some of its heads becomes the smaller
//!   conditional;
//! - symbolic and constant substitutions float towards the root; policy
//!   substitutions sink to the factors that mention their target;
//! - an equilibrium block whose members all keep observational mechanisms
//!   becomes the observed block conditional.

use crate::expr::{Assignment, BlockMechanism, Expr};
use crate::render::plain;
use sgpid_graph::VSet;
use std::collections::BTreeMap;

/// Canonical form of `e`.
pub fn canonicalize(e: &Expr) -> Expr {
    let mut cur = e.clone();
    for merge in [false, true] {
        for _ in 0..256 {
            let next = step(&cur, merge);
            if next == cur {
                break;
            }
            cur = next;
        }
    }
    cur
}

fn is_floating(a: &Assignment) -> bool {
    !matches!(a, Assignment::Policy { .. })
}

fn step(e: &Expr, merge: bool) -> Expr {
    match e {
        Expr::ObservedJoint { .. } | Expr::PolicyFactor { .. } => e.clone(),
        Expr::Conditional { child, given } => {
            let c = step(child, merge);
            if given.is_empty() {
                return c;
            }
            if let Expr::Conditional {
                child: inner,
                given: g1,
            } = &c
            {
                if matches!(inner.as_ref(), Expr::ObservedJoint { .. }) && g1.is_subset(given) {
                    return Expr::Conditional {
                        child: inner.clone(),
                        given: given.clone(),
                    };
                }
            }
            Expr::Conditional {
                child: Box::new(c),
                given: given.clone(),
            }
        }
        Expr::Marginal { child, keep } => {
            let c = step(child, merge);
            if c.free_vars().is_subset(keep) {
                return c;
            }
            if let Some((h, g)) = c.as_prob() {
                if g.is_subset(keep) {
                    return Expr::prob(h.intersection(keep).cloned().collect(), g);
                }
            }
            Expr::Marginal {
                child: Box::new(c),
                keep: keep.clone(),
            }
        }
        Expr::Product { factors } => product_rules(factors.iter().map(|f| step(f, merge)).collect(), merge),
        Expr::SumOver { vars, child } => sum_rules(vars, step(child, merge)),
        Expr::Fix {
            child,
            vertex,
            graph,
        } => Expr::Fix {
            child: Box::new(step(child, merge)),
            vertex: vertex.clone(),
            graph: graph.clone(),
        },
        Expr::Substitute { child, assignments } => subst_rules(step(child, merge), assignments),
        Expr::BlockEquilibrium {
            block,
            given,
            mechanisms,
        } => {
            if mechanisms
                .values()
                .all(|m| matches!(m, BlockMechanism::Observed { .. }))
            {
                Expr::prob(block.clone(), given.clone())
            } else {
                e.clone()
            }
        }
    }
}

fn product_rules(children: Vec<Expr>, merge: bool) -> Expr {
    let mut fs: Vec<Expr> = Vec::new();
    for c in children {
        match c {
            Expr::Product { factors } => fs.extend(factors),
            other => fs.push(other),
        }
    }
    // Float a symbolic substitution above its siblings when they do not use its variables.
    for i in 0..fs.len() {
        if let Expr::Substitute { child, assignments } = &fs[i] {
            if !assignments.values().all(is_floating) {
                continue;
            }
            let others: VSet = fs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, f)| f.free_vars())
                .collect();
            if assignments.keys().all(|a| !others.contains(a)) {
                let (child, assignments) = (child.as_ref().clone(), assignments.clone());
                let mut rest = fs.clone();
                rest[i] = child;
                return Expr::Substitute {
                    child: Box::new(Expr::Product { factors: rest }),
                    assignments,
                };
            }
        }
    }
    if merge {
        chain_merge(&mut fs);
    }
    fs.sort_by_cached_key(plain);
    Expr::product(fs)
}

/// Merges `p(H1 | H2 ∪ G) p(H2 | G)` into `p(H1 ∪ H2 | G)` until no pair applies.
fn chain_merge(fs: &mut Vec<Expr>) {
    'outer: loop {
        for i in 0..fs.len() {
            let Some((h1, g1)) = fs[i].as_prob() else {
                continue;
            };
            for j in 0..fs.len() {
                if i == j {
                    continue;
                }
                let Some((h2, g2)) = fs[j].as_prob() else {
                    continue;
                };
                let cond: VSet = h2.union(&g2).cloned().collect();
                if g1 == cond && h1.is_disjoint(&cond) {
                    let merged = Expr::prob(h1.union(&h2).cloned().collect(), g2);
                    let (a, b) = (i.max(j), i.min(j));
                    fs.remove(a);
                    fs.remove(b);
                    fs.push(merged);
                    continue 'outer;
                }
            }
        }
        return;
    }
}

fn sum_rules(vars: &VSet, c: Expr) -> Expr {
    let free = c.free_vars();
    let vars: VSet = vars.intersection(&free).cloned().collect();
    if vars.is_empty() {
        return c;
    }
    match c {
        Expr::Substitute { child, assignments }
            if assignments.values().all(is_floating)
                && assignments.keys().all(|a| !vars.contains(a)) =>
        {
            Expr::Substitute {
                child: Box::new(Expr::sum(vars, *child)),
                assignments,
            }
        }
        Expr::SumOver { vars: inner, child } => {
            Expr::sum(vars.union(&inner).cloned().collect(), *child)
        }
        Expr::Product { factors } => {
            let (inside, outside): (Vec<Expr>, Vec<Expr>) = factors
                .into_iter()
                .partition(|f| !f.free_vars().is_disjoint(&vars));
            let (vars, mut inside) = collapse_leaves(vars, inside);
            chain_merge(&mut inside);
            let inner = Expr::sum(vars, Expr::product(inside));
            if outside.is_empty() {
                inner
            } else {
                let mut all = outside;
                all.push(inner);
                Expr::Product { factors: all }
            }
        }
        other => {
            let (vars, inside) = collapse_leaves(vars, vec![other]);
            Expr::sum(vars, Expr::product(inside))
        }
    }
}

/// Removes summed variables that appear only as the sole head of one observed
/// conditional or as the target of one policy factor, dropping that factor.
/// A sum whose body is a single observed conditional over the summed
/// variables becomes the smaller conditional.
fn collapse_leaves(mut vars: VSet, mut fs: Vec<Expr>) -> (VSet, Vec<Expr>) {
    'outer: loop {
        for x in vars.clone() {
            let mentions: Vec<usize> = (0..fs.len())
                .filter(|&i| fs[i].free_vars().contains(&x))
                .collect();
            if mentions.is_empty() {
                vars.remove(&x);
                continue 'outer;
            }
            if mentions.len() != 1 {
                continue;
            }
            let i = mentions[0];
            if let Some((h, _)) = fs[i].as_prob() {
                if h.len() == 1 && h.contains(&x) {
                    fs.remove(i);
                    vars.remove(&x);
                    continue 'outer;
                }
            }
            if let Expr::PolicyFactor { policy } = &fs[i] {
                if policy.target == x {
                    fs.remove(i);
                    vars.remove(&x);
                    continue 'outer;
                }
            }
        }
        if let [f] = fs.as_slice() {
            if let Some((h, g)) = f.as_prob() {
                if vars.is_subset(&h) {
                    let rest: VSet = h.difference(&vars).cloned().collect();
                    let single = if rest.is_empty() { Expr::one() } else { Expr::prob(rest, g) };
                    return (VSet::new(), vec![single]);
                }
            }
        }
        return (vars, fs);
    }
}

fn subst_rules(c: Expr, assignments: &BTreeMap<String, Assignment>) -> Expr {
    let free = c.free_vars();
    let live: BTreeMap<String, Assignment> = assignments
        .iter()
        .filter(|(a, _)| free.contains(*a))
        .map(|(a, s)| (a.clone(), s.clone()))
        .collect();
    if live.is_empty() {
        return c;
    }
    let (floating, sinking): (BTreeMap<_, _>, BTreeMap<_, _>) =
        live.into_iter().partition(|(_, s)| is_floating(s));
    let mut body = c;
    if !sinking.is_empty() {
        body = sink(body, sinking);
    }
    if floating.is_empty() {
        return body;
    }
    match body {
        Expr::Substitute {
            child,
            assignments: mut inner,
        } if inner.values().all(is_floating) && floating.keys().all(|a| !inner.contains_key(a)) => {
            inner.extend(floating);
            Expr::Substitute {
                child,
                assignments: inner,
            }
        }
        other => Expr::Substitute {
            child: Box::new(other),
            assignments: floating,
        },
    }
}

/// Pushes policy substitutions towards the factors mentioning their targets.
fn sink(c: Expr, pol: BTreeMap<String, Assignment>) -> Expr {
    let introduced: VSet = pol
        .values()
        .flat_map(Assignment::inputs)
        .chain(pol.keys().cloned())
        .collect();
    match c {
        Expr::Product { factors } => Expr::Product {
            factors: factors
                .into_iter()
                .map(|f| {
                    let fv = f.free_vars();
                    let rel: BTreeMap<String, Assignment> = pol
                        .iter()
                        .filter(|(a, _)| fv.contains(*a))
                        .map(|(a, s)| (a.clone(), s.clone()))
                        .collect();
                    if rel.is_empty() {
                        f
                    } else {
                        Expr::Substitute {
                            child: Box::new(f),
                            assignments: rel,
                        }
                    }
                })
                .collect(),
        },
        Expr::SumOver { vars, child } if vars.is_disjoint(&introduced) => Expr::SumOver {
            vars,
            child: Box::new(Expr::Substitute {
                child,
                assignments: pol,
            }),
        },
        other => Expr::Substitute {
            child: Box::new(other),
            assignments: pol,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sgpid_graph::vset;

    fn p(h: &[&str], g: &[&str]) -> Expr {
        Expr::prob(vset(h.iter().copied()), vset(g.iter().copied()))
    }

    #[test]
    fn chain_rule_cancels_division() {
        let e = Expr::product(vec![p(&["B"], &["A"]), p(&["A"], &[])]);
        assert_eq!(canonicalize(&e), p(&["A", "B"], &[]));
    }

    #[test]
    fn sum_over_absent_variable_vanishes() {
        assert_eq!(
            canonicalize(&Expr::sum(vset(["X"]), p(&["Y"], &[]))),
            p(&["Y"], &[])
        );
    }

    #[test]
    fn leaf_heads_collapse() {
        let e = Expr::sum(
            vset(["B", "C"]),
            Expr::product(vec![p(&["A"], &[]), p(&["B"], &["A"]), p(&["C"], &["B"])]),
        );
        assert_eq!(canonicalize(&e), p(&["A"], &[]));
        let joint = Expr::sum(vset(["B"]), p(&["A", "B"], &["C"]));
        assert_eq!(canonicalize(&joint), p(&["A"], &["C"]));
        let kept = Expr::sum(vset(["B", "C"]), Expr::product(vec![p(&["A", "B"], &["C", "E"]), p(&["C"], &[])]));
        assert_eq!(canonicalize(&kept), canonicalize(&canonicalize(&kept)));
        assert!(matches!(canonicalize(&kept), Expr::SumOver { .. }));
    }

    #[test]
    fn factors_not_mentioning_the_sum_are_pulled_out() {
        let e = Expr::sum(
            vset(["X"]),
            Expr::product(vec![p(&["Y"], &["X", "Z"]), p(&["X"], &[]), p(&["Z"], &[])]),
        );
        match canonicalize(&e) {
            Expr::Product { factors } => {
                assert!(factors.contains(&p(&["Z"], &[])));
                assert!(factors.iter().any(|f| matches!(f, Expr::SumOver { .. })));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn observational_block_equilibrium_is_observed_conditional() {
        let e = Expr::BlockEquilibrium {
            block: vset(["C2", "C3"]),
            given: VSet::new(),
            mechanisms: BTreeMap::from([
                (
                    "C2".to_string(),
                    BlockMechanism::Observed {
                        given: vset(["C3"]),
                    },
                ),
                (
                    "C3".to_string(),
                    BlockMechanism::Observed {
                        given: vset(["C2"]),
                    },
                ),
            ]),
        };
        assert_eq!(canonicalize(&e), p(&["C2", "C3"], &[]));
    }

    #[test]
    fn idempotent_on_examples() {
        let e = Expr::sum(
            vset(["X"]),
            Expr::product(vec![p(&["Y"], &["X"]), p(&["X"], &["W"]), p(&["W"], &[])]),
        );
        let c = canonicalize(&e);
        assert_eq!(canonicalize(&c), c);
    }
}
