use sgpid_estimand::*;
use sgpid_graph::{vset, Edge, MixedGraph, VSet};
use sgpid_intervention::{Policy, PolicySet};
use sgpid_projection::decompose;
use std::path::PathBuf;

fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn graph(name: &str) -> MixedGraph {
    MixedGraph::load(corpus(&format!("graphs/{name}.json"))).unwrap()
}

fn policies(name: &str) -> PolicySet {
    PolicySet::load(corpus(&format!("policies/{name}.json"))).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(corpus(&format!("goldens/{name}.txt"))).unwrap().trim_end().to_string()
}

fn symbolic(names: &[&str]) -> NodeAssignment {
    names.iter().map(|n| (n.to_string(), None)).collect()
}

fn identified(r: IdResult) -> Estimand {
    match r {
        IdResult::Identified(e) => e,
        other => panic!("expected an identified estimand, got {other:?}"),
    }
}

fn text(e: &Estimand) -> String {
    render(e, Format::Text)
}

#[test]
fn golden_front_door() {
    let e = identified(id_admg(&graph("frontdoor"), &vset(["Y2"]), &symbolic(&["A2"])).unwrap());
    assert_eq!(text(&e), golden("frontdoor"));
    assert_eq!(e.symbolic, vset(["A2"]));
    assert!(e.inert.is_empty());
}

#[test]
fn golden_elections_node_intervention() {
    let e = identified(id_sg(&graph("fig1b"), &vset(["Y_l"]), &symbolic(&["A_l"])).unwrap());
    assert_eq!(text(&e), golden("elections"));
}

#[test]
fn golden_fig2_table2_policy() {
    let e = identified(policy_id_sg(&graph("fig2a"), &vset(["Y2", "Y3"]), &policies("table2")).unwrap());
    assert_eq!(text(&e), golden("fig2_table2"));
    assert!(e.inert.is_empty());
}

#[test]
fn golden_myopic_policy() {
    let e = identified(policy_id_sg(&graph("fig1b"), &vset(["Y_l"]), &policies("eq3")).unwrap());
    assert_eq!(text(&e), golden("eq3"));
}

#[test]
fn latex_rendering_of_the_front_door() {
    let e = identified(id_admg(&graph("frontdoor"), &vset(["Y2"]), &symbolic(&["A2"])).unwrap());
    assert_eq!(
        render(&e, Format::Latex),
        "\\sum_{M_{2},C_{2}} p(M_{2}|a_{2},C_{2}) p(C_{2}) \\sum_{A_{2}'} p(Y_{2}|M_{2},C_{2},A_{2}') p(A_{2}'|C_{2})"
    );
}

#[test]
fn constant_front_door_policy_prints_the_value() {
    let e = identified(policy_id_sg(&graph("frontdoor"), &vset(["Y2"]), &policies("frontdoor_do")).unwrap());
    assert_eq!(text(&e), "Σ_{M2,C2} p(M2|A2=1,C2) p(C2) Σ_{A2'} p(Y2|M2,C2,A2') p(A2'|C2)");
    assert!(e.symbolic.is_empty());
}

#[test]
fn bow_is_not_identified_with_a_checkable_witness() {
    let g = graph("bow");
    match id_admg(&g, &vset(["Y1"]), &symbolic(&["A1"])).unwrap() {
        IdResult::NotIdentified { district, graph } => {
            assert!(district.contains("Y1"));
            assert!(reachable(&district, &graph).is_none());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn policy_on_the_bow_is_not_identified() {
    let g = graph("bow");
    let ps = PolicySet::new(vec![Policy::param("A1", vset(["C1"]), "f")]).unwrap();
    assert!(matches!(policy_id_admg(&g, &vset(["Y1"]), &ps).unwrap(), IdResult::NotIdentified { .. }));
    assert!(matches!(policy_id_sg(&g, &vset(["Y1"]), &ps).unwrap(), IdResult::NotIdentified { .. }));
}

#[test]
fn fig2a_subgraph_on_the_first_unit_is_not_identified() {
    let g = graph("fig2a").induced_subgraph(&vset(["C1", "A1", "M1", "Y1"])).unwrap();
    match id_admg(&g, &vset(["Y1"]), &symbolic(&["A1"])).unwrap() {
        IdResult::NotIdentified { district, graph } => {
            assert!(district.contains("Y1"));
            assert!(reachable(&district, &graph).is_none());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn segregated_graph_embedding_the_bow_is_not_identified() {
    let g = MixedGraph::parse("A->Y, A<->Y, B1--B2, B2->Y").unwrap();
    assert!(matches!(id_sg(&g, &vset(["Y"]), &symbolic(&["A"])).unwrap(), IdResult::NotIdentified { .. }));
}

#[test]
fn segregated_graph_without_blocks_reduces_to_the_admg_algorithm() {
    let g = graph("frontdoor");
    let a = symbolic(&["A2"]);
    assert_eq!(id_sg(&g, &vset(["Y2"]), &a).unwrap(), id_admg(&g, &vset(["Y2"]), &a).unwrap());
}

#[test]
fn empty_policy_set_gives_the_outcome_marginal() {
    for (g, y) in [("fig1b", vset(["Y_l"])), ("frontdoor", vset(["Y2"])), ("fig2a", vset(["Y2", "Y3"]))] {
        let e = identified(policy_id_sg(&graph(g), &y, &policies("empty")).unwrap());
        assert_eq!(e.expr, Expr::prob(y.clone(), VSet::new()), "{g}");
    }
}

#[test]
fn single_candidate_policy_is_a_backdoor_functional() {
    let g = MixedGraph::parse("C->A, A->Y, C->Y").unwrap();
    let ps = PolicySet::new(vec![Policy::param("A", vset(["C"]), "f")]).unwrap();
    let e = identified(policy_id_admg(&g, &vset(["Y"]), &ps).unwrap());
    assert_eq!(text(&e), "Σ_{C} p(Y|f_{A}(C),C) p(C)");
}

#[test]
fn stochastic_policy_keeps_its_weight_and_the_sum() {
    let g = MixedGraph::parse("C->A, A->Y, C->Y").unwrap();
    let ps = PolicySet::new(vec![Policy::cpt(&g, "A", vset(["C"]), &[0.3, 0.7, 0.6, 0.4]).unwrap()]).unwrap();
    let e = identified(policy_id_sg(&g, &vset(["Y"]), &ps).unwrap());
    assert_eq!(text(&e), "Σ_{A,C} p(Y|A,C) f_{A}(A|C) p(C)");
}

#[test]
fn appendix_chain_of_fixings() {
    let fig2d = graph("fig2d");
    let g = fig2d.without_edges(&[Edge::bidirected("C1", "Y1")]);
    let gd = decompose(&g).unwrap().cadmg;
    assert_eq!(gd.random(), vset(["A1", "C1", "M1", "Y1", "Y2", "Y3"]));
    let q = Expr::prob(gd.random(), gd.fixed().clone());
    let (q1, g1) = fix_vertex(&q, "C1", &gd).unwrap();
    let rest = vset(["A1", "M1", "Y1", "Y2", "Y3"]);
    let mut given = gd.fixed().clone();
    given.insert("C1".into());
    assert_eq!(q1, Expr::prob(rest, given));
    let (mut cur, mut cg) = (q1, g1);
    for v in ["A1", "M1", "Y1"] {
        let (nq, ng) = fix_vertex(&cur, v, &cg).unwrap();
        cur = nq;
        cg = ng;
    }
    let (heads, given) = cur.as_prob().expect("the chain stays an observed conditional");
    assert_eq!(heads, vset(["Y2", "Y3"]));
    assert!(vset(["C1", "C2", "M1", "M2", "M3", "A1", "Y1"]).is_subset(&given));
}

#[test]
fn fixing_a_vertex_that_is_not_fixable_errors() {
    let g = graph("frontdoor");
    let q = Expr::prob(g.random(), VSet::new());
    assert!(matches!(fix_vertex(&q, "A2", &g), Err(EstimandError::NotFixable { .. })));
    let (_, g2) = fix_vertex(&q, "M2", &g).unwrap();
    assert!(fix_vertex(&q, "M2", &g2).is_err());
}

#[test]
fn identification_is_fast() {
    let start = std::time::Instant::now();
    for _ in 0..10 {
        policy_id_sg(&graph("fig2a"), &vset(["Y2", "Y3"]), &policies("table2")).unwrap();
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}
