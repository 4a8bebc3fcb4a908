//! Identification of node and policy interventions.
//!
//! Every algorithm shares one core. The outcome's anterior set `T` in the
//! intervened graph is split into:
//! - intervened blocks with more than one member, kept as equilibrium factors;
//! - singleton intervened vertices, substituted (deterministic policies and
//!   node interventions) or weighted by their policy (stochastic policies);
//! - non-intervened pieces of blocks, kept as observed block conditionals;
//! - districts of the remaining vertices, each given by the fixing kernel of
//!   the district part of the input graph.
//!
//! The product is summed over `T` minus the outcome and the substituted
//! targets, then canonicalized. With no targets at all the answer is the
//! observed marginal of the outcome.

use crate::canon::canonicalize;
use crate::expr::{Assignment, BlockMechanism, Estimand, Expr};
use crate::kernel::district_kernel_ordered;
use crate::{EstimandError, IdResult, Result};
use sgpid_graph::{GraphClass, MixedGraph, Relation, VSet};
use sgpid_intervention::{intervene_graph, Mechanism, Policy, PolicySet};
use sgpid_projection::decompose;
use std::collections::BTreeMap;

/// Node intervention values; `None` leaves the value symbolic.
pub type NodeAssignment = BTreeMap<String, Option<usize>>;

fn require(g: &MixedGraph, class: GraphClass, algorithm: &'static str) -> Result<()> {
    if g.classify().is(class) {
        Ok(())
    } else {
        Err(EstimandError::WrongClass {
            algorithm,
            expected: class,
        })
    }
}

fn node_policies(a: &NodeAssignment) -> Result<PolicySet> {
    Ok(PolicySet::node(
        a.iter().map(|(k, v)| (k.clone(), v.unwrap_or(0))),
    )?)
}

fn node_assignment(v: Option<usize>) -> Assignment {
    match v {
        None => Assignment::Symbolic,
        Some(value) => Assignment::Value { value },
    }
}

fn policy_assignment(p: &Policy) -> Assignment {
    match p.mechanism {
        Mechanism::Const { value } => Assignment::Value { value },
        _ => Assignment::Policy { policy: p.clone() },
    }
}

fn check_outcome(g: &MixedGraph, y: &VSet, targets: &VSet) -> Result<()> {
    if y.is_empty() {
        return Err(EstimandError::EmptyOutcome);
    }
    g.check_names(y)?;
    if let Some(v) = y.intersection(targets).next() {
        return Err(EstimandError::OutcomeIsTarget(v.clone()));
    }
    Ok(())
}

fn excluding(a: &VSet, b: &VSet) -> VSet {
    a.difference(b).cloned().collect()
}

/// The shared identification core. With `node` set, targets are node
/// interventions with the given values; otherwise `ps` is applied as policies.
fn identify(
    g: &MixedGraph,
    y: &VSet,
    ps: &PolicySet,
    node: Option<&NodeAssignment>,
) -> Result<IdResult> {
    let targets = ps.targets();
    check_outcome(g, y, &targets)?;
    let gfa = intervene_graph(g, ps)?;
    let t = gfa.anterior(y);
    let dec = decompose(g)?;
    let order_depths = g.block_depths()?;
    if targets.is_empty() {
        let expr = Expr::prob(y.clone(), VSet::new());
        let est = Estimand { expr, order: order_depths, outcome: y.clone(), inert: VSet::new(), symbolic: VSet::new() };
        return Ok(IdResult::Identified(est));
    }
    let mut factors = Vec::new();
    let mut assignments: BTreeMap<String, Assignment> = BTreeMap::new();
    for b in gfa.induced_subgraph(&t)?.blocks() {
        let hit: VSet = b.intersection(&targets).cloned().collect();
        if !hit.is_empty() && b.len() > 1 {
            let mut mechanisms = BTreeMap::new();
            for v in &b {
                let m = match ps.get(v) {
                    Some(p) => BlockMechanism::Policy { policy: p.clone() },
                    None => BlockMechanism::Observed {
                        given: g.pa(v)?.union(g.nb(v)?).cloned().collect(),
                    },
                };
                mechanisms.insert(v.clone(), m);
            }
            let given = excluding(&gfa.relatives(&b, Relation::Parents)?, &b);
            factors.push(Expr::BlockEquilibrium {
                block: b,
                given,
                mechanisms,
            });
        } else if let Some(a) = hit.first() {
            let p = ps.get(a).expect("targets have policies");
            match node {
                Some(values) => {
                    assignments
                        .insert(a.clone(), node_assignment(values.get(a).copied().flatten()));
                }
                None if p.is_deterministic() => {
                    assignments.insert(a.clone(), policy_assignment(p));
                }
                None => factors.push(Expr::PolicyFactor { policy: p.clone() }),
            }
        } else if b.is_subset(&dec.b_star) {
            let mut given = g.relatives(&b, Relation::Parents)?;
            given.extend(g.relatives(&b, Relation::Neighbors)?);
            factors.push(Expr::prob(b.clone(), excluding(&given, &b)));
        }
    }
    let members: VSet = excluding(&t, &targets)
        .intersection(&dec.d_star)
        .cloned()
        .collect();
    let order: BTreeMap<String, usize> = g
        .vertex_order()?
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    for d in g.induced_subgraph(&members)?.districts() {
        match district_kernel_ordered(&dec.cadmg, &d, &order)? {
            Some(k) => factors.push(k),
            None => {
                return Ok(IdResult::NotIdentified {
                    district: d,
                    graph: dec.cadmg.clone(),
                })
            }
        }
    }
    let substituted: VSet = assignments.keys().cloned().collect();
    let summed = excluding(&excluding(&t, y), &substituted);
    let mut body = Expr::product(factors);
    // A policy input that is itself a substituted target is replaced in an
    // enclosing layer, so chains such as A2 = f(A1), A1 = 1 compose.
    let mut layer = assignments.clone();
    for _ in 0..=assignments.len() {
        if layer.is_empty() {
            break;
        }
        let introduced: VSet = layer.values().flat_map(Assignment::inputs).collect();
        body = Expr::Substitute {
            child: Box::new(body),
            assignments: layer,
        };
        layer = assignments
            .iter()
            .filter(|(k, _)| introduced.contains(*k))
            .map(|(k, a)| (k.clone(), a.clone()))
            .collect();
    }
    let expr = canonicalize(&Expr::sum(summed, body));
    let symbolic: VSet = assignments
        .iter()
        .filter(|(_, s)| matches!(s, Assignment::Symbolic))
        .map(|(a, _)| a.clone())
        .collect();
    let inert = excluding(&excluding(&expr.free_vars(), y), &symbolic);
    Ok(IdResult::Identified(Estimand {
        expr,
        order: order_depths,
        outcome: y.clone(),
        inert,
        symbolic,
    }))
}

/// `p(Y(f_A))` for a segregation-preserving policy set on an SG.
pub fn policy_id_sg(g: &MixedGraph, y: &VSet, ps: &PolicySet) -> Result<IdResult> {
    require(g, GraphClass::SG, "policy_id_sg")?;
    identify(g, y, ps, None)
}

/// `p(Y(f_A))` on an ADMG, where every policy input must precede its target.
pub fn policy_id_admg(g: &MixedGraph, y: &VSet, ps: &PolicySet) -> Result<IdResult> {
    require(g, GraphClass::ADMG, "policy_id_admg")?;
    ps.validate(g)?;
    let order = g.vertex_order()?;
    let pos: BTreeMap<&String, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    for p in ps.iter() {
        if let Some(z) = p.inputs.iter().find(|z| pos[z] >= pos[&p.target]) {
            return Err(EstimandError::PrecedenceViolation {
                target: p.target.clone(),
                input: z.clone(),
            });
        }
    }
    identify(g, y, ps, None)
}

/// `p(Y(a))` for a node intervention on an SG.
pub fn id_sg(g: &MixedGraph, y: &VSet, a: &NodeAssignment) -> Result<IdResult> {
    require(g, GraphClass::SG, "id_sg")?;
    identify(g, y, &node_policies(a)?, Some(a))
}

/// `p(Y(a))` for a node intervention on an ADMG.
pub fn id_admg(g: &MixedGraph, y: &VSet, a: &NodeAssignment) -> Result<IdResult> {
    require(g, GraphClass::ADMG, "id_admg")?;
    identify(g, y, &node_policies(a)?, Some(a))
}

fn substituted(body: Expr, a: &NodeAssignment) -> Expr {
    if a.is_empty() {
        return body;
    }
    let assignments = a
        .iter()
        .map(|(k, v)| (k.clone(), node_assignment(*v)))
        .collect();
    Expr::Substitute {
        child: Box::new(body),
        assignments,
    }
}

/// The DAG g-formula: the joint over the non-intervened vertices, before
/// canonicalization.
pub fn g_formula_dag(g: &MixedGraph, a: &NodeAssignment) -> Result<Expr> {
    require(g, GraphClass::DAG, "g_formula_dag")?;
    g.check_names(a.keys())?;
    let mut factors = Vec::new();
    for v in g.names() {
        if !a.contains_key(&v) {
            factors.push(Expr::prob(VSet::from([v.clone()]), g.pa(&v)?.clone()));
        }
    }
    Ok(substituted(Expr::product(factors), a))
}

/// The chain-graph g-formula: one factor per block.
pub fn g_formula_cg(g: &MixedGraph, a: &NodeAssignment) -> Result<Expr> {
    require(g, GraphClass::CG, "g_formula_cg")?;
    g.check_names(a.keys())?;
    let targets: VSet = a.keys().cloned().collect();
    let mut factors = Vec::new();
    for b in g.blocks() {
        let heads = excluding(&b, &targets);
        if heads.is_empty() {
            continue;
        }
        let mut given = excluding(&g.relatives(&b, Relation::Parents)?, &b);
        given.extend(b.intersection(&targets).cloned());
        factors.push(Expr::prob(heads, given));
    }
    Ok(substituted(Expr::product(factors), a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::plain;
    use sgpid_graph::vset;

    fn sym(names: &[&str]) -> NodeAssignment {
        names.iter().map(|n| (n.to_string(), None)).collect()
    }

    fn estimand(r: IdResult) -> Estimand {
        match r {
            IdResult::Identified(e) => e,
            other => panic!("not identified: {other:?}"),
        }
    }

    #[test]
    fn backdoor_g_formula() {
        let g = MixedGraph::parse("C->A, A->Y, C->Y").unwrap();
        let joint = g_formula_dag(&g, &sym(&["A"])).unwrap();
        let marg = canonicalize(&Expr::sum(vset(["C"]), joint));
        assert_eq!(plain(&marg), "Σ_{C} p(C) p(Y|a,C)");
        let e = estimand(id_admg(&g, &vset(["Y"]), &sym(&["A"])).unwrap());
        assert_eq!(e.expr, marg);
    }

    #[test]
    fn chain_graph_g_formula_block_factor() {
        let g = MixedGraph::parse("A->Y1, Y1--Y2").unwrap();
        let e = canonicalize(&g_formula_cg(&g, &sym(&["A"])).unwrap());
        assert_eq!(plain(&e), "p(Y1,Y2|a)");
        let none = canonicalize(&g_formula_cg(&g, &NodeAssignment::new()).unwrap());
        assert_eq!(plain(&none), "p(A,Y1,Y2)");
    }

    #[test]
    fn empty_intervention_gives_outcome_marginal() {
        let g = MixedGraph::parse("C->A, A->Y, C->Y, A<->Y").unwrap();
        let e = estimand(id_admg(&g, &vset(["Y"]), &NodeAssignment::new()).unwrap());
        assert_eq!(e.expr, Expr::prob(vset(["Y"]), VSet::new()));
    }

    #[test]
    fn bow_is_not_identified() {
        let g = MixedGraph::parse("A->Y, A<->Y").unwrap();
        match id_admg(&g, &vset(["Y"]), &sym(&["A"])).unwrap() {
            IdResult::NotIdentified { district, graph } => {
                assert_eq!(district, vset(["Y"]));
                assert!(crate::kernel::reachable(&district, &graph).is_none());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_class_and_bad_outcomes() {
        let cg = MixedGraph::parse("A->B, B--C").unwrap();
        assert!(matches!(
            id_admg(&cg, &vset(["C"]), &sym(&["A"])),
            Err(EstimandError::WrongClass { .. })
        ));
        let g = MixedGraph::parse("A->Y").unwrap();
        assert!(matches!(
            id_admg(&g, &vset(["A"]), &sym(&["A"])),
            Err(EstimandError::OutcomeIsTarget(_))
        ));
        assert!(matches!(
            id_admg(&g, &VSet::new(), &sym(&["A"])),
            Err(EstimandError::EmptyOutcome)
        ));
    }

    #[test]
    fn precedence_violation() {
        let g = MixedGraph::parse("A->Y, Y->W").unwrap();
        let ps = PolicySet::new(vec![Policy::param("A", vset(["W"]), "f")]).unwrap();
        assert!(matches!(
            policy_id_admg(&g, &vset(["Y"]), &ps),
            Err(EstimandError::PrecedenceViolation { .. })
        ));
    }
}
