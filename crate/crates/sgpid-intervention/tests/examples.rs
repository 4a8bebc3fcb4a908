//! Interventions on the shipped example graphs and hand-built cases.

use sgpid_graph::{vset, EdgeKind, MixedGraph};
use sgpid_intervention::taxonomy::{add_undirected_edge, complete_removal, partial_removal};
use sgpid_intervention::{
    induced_dependence, intervene_graph, is_segregation_preserving, Policy, PolicySet, Violation,
};
use std::path::PathBuf;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn graph(name: &str) -> MixedGraph {
    MixedGraph::load(root().join("graphs").join(format!("{name}.json"))).unwrap()
}

fn policies(name: &str) -> PolicySet {
    PolicySet::load(root().join("policies").join(format!("{name}.json"))).unwrap()
}

#[test]
fn table2_on_fig2a_gives_fig2d() {
    let g = graph("fig2a");
    let ps = policies("table2");
    assert!(is_segregation_preserving(&ps, &g).unwrap().preserving);
    assert_eq!(intervene_graph(&g, &ps).unwrap(), graph("fig2d"));
}

#[test]
fn table2_mutual_dependence_of_a2_and_a3() {
    let rel = induced_dependence(&policies("table2"), &graph("fig2a")).unwrap();
    assert!(rel.contains(&("A2".into(), "A3".into())));
    assert!(rel.contains(&("A3".into(), "A2".into())));
    assert!(rel.contains(&("M2".into(), "A2".into())));
    assert!(!rel.contains(&("A2".into(), "M2".into())));
}

#[test]
fn transitive_dependence_through_a_chain() {
    let g = MixedGraph::parse("W, X, Y").unwrap();
    let ps = PolicySet::new(vec![
        Policy::constant("W", 0),
        Policy::param("X", vset(["W"]), "f"),
        Policy::param("Y", vset(["X"]), "f"),
    ])
    .unwrap();
    let rel = induced_dependence(&ps, &g).unwrap();
    assert!(rel.contains(&("Y".into(), "W".into())));
    assert!(rel.contains(&("X".into(), "W".into())));
    assert!(!rel.contains(&("W".into(), "X".into())));
    assert_eq!(rel.len(), 3);
}

#[test]
fn dependence_through_a_non_target_mediator() {
    let g = MixedGraph::parse("A->M, M->B").unwrap();
    let ps = PolicySet::node([("A", 1)]).unwrap().with(Policy::param("B", vset(["M"]), "f"));
    assert!(induced_dependence(&ps, &g).unwrap().contains(&("B".into(), "A".into())));
}

#[test]
fn directed_three_cycle_is_rejected() {
    // W -> X -> Y -> W through policies only.
    let g = MixedGraph::parse("W, X, Y").unwrap();
    let ps = PolicySet::new(vec![
        Policy::param("X", vset(["W"]), "f"),
        Policy::param("Y", vset(["X"]), "f"),
        Policy::param("W", vset(["Y"]), "f"),
    ])
    .unwrap();
    let c = is_segregation_preserving(&ps, &g).unwrap();
    assert!(matches!(c.violation, Some(Violation::MutualDependence { .. })));
}

#[test]
fn cycle_through_an_existing_block_is_rejected() {
    // W -> X -- Y with a policy making W depend on Y.
    let g = MixedGraph::parse("W->X, X--Y").unwrap();
    let ps = PolicySet::new(vec![Policy::param("W", vset(["Y"]), "f")]).unwrap();
    let c = is_segregation_preserving(&ps, &g).unwrap();
    assert_eq!(c.violation, Some(Violation::StrictExterior { target: "W".into(), input: "Y".into() }));
}

#[test]
fn cycle_through_two_undirected_edges_is_rejected() {
    // W -> X -- Y -- W where Y -- W would come from mutual policies.
    let g = MixedGraph::parse("W->X, X--Y").unwrap();
    let ps = PolicySet::new(vec![Policy::param("W", vset(["Y"]), "f"), Policy::param("Y", vset(["W", "X"]), "g")])
        .unwrap();
    let c = is_segregation_preserving(&ps, &g).unwrap();
    assert!(!c.preserving, "{c:?}");
}

#[test]
fn mutual_dependence_without_membership_is_rejected() {
    // X depends on Y only through a mediator, Y depends on X directly.
    let g = MixedGraph::parse("M, X, Y").unwrap();
    let ps = PolicySet::new(vec![
        Policy::param("M", vset(["Y"]), "f"),
        Policy::param("X", vset(["M"]), "f"),
        Policy::param("Y", vset(["X"]), "f"),
    ])
    .unwrap();
    assert!(matches!(
        is_segregation_preserving(&ps, &g).unwrap().violation,
        Some(Violation::MutualDependence { .. })
    ));
}

#[test]
fn partial_removal_on_fig1c() {
    let g = graph("fig1c");
    let ps = partial_removal(&g, ("A_l", "A_r"), "A_r").unwrap();
    assert_eq!(ps, policies("eq3"));
    let out = intervene_graph(&g, &ps).unwrap();
    assert!(out.has_directed("A_l", "A_r"));
    assert!(!out.has_undirected("A_l", "A_r"));
}

#[test]
fn complete_removal_on_fig1c() {
    let g = graph("fig1c");
    let out = intervene_graph(&g, &complete_removal(&g, ("A_l", "A_r")).unwrap()).unwrap();
    assert!(!out.edges().any(|e| e.touches("A_l") && e.touches("A_r")));
}

#[test]
fn adding_a2_a3_edge_in_fig2a() {
    let g = graph("fig2a");
    let base = PolicySet::new(vec![
        Policy::param("A2", vset(["C2", "C3"]), "f"),
        Policy::param("A3", vset(["C3"]), "f"),
    ])
    .unwrap();
    let ps = add_undirected_edge(&g, &base, "A2", "A3").unwrap();
    let out = intervene_graph(&g, &ps).unwrap();
    assert!(out.has_undirected("A2", "A3"));
    assert_eq!(out.edges_of(EdgeKind::Undirected).filter(|e| e.touches("A2")).count(), 1);
}

#[test]
fn table2_as_printed_is_also_valid() {
    let g = graph("fig2a");
    let out = intervene_graph(&g, &policies("table2_as_printed")).unwrap();
    assert!(!out.has_directed("C1", "A1"));
}

#[test]
fn empty_policy_file_leaves_graph_unchanged() {
    let g = graph("fig2a");
    assert_eq!(intervene_graph(&g, &policies("empty")).unwrap(), g);
}

#[test]
fn mutual_pair_closing_a_directed_path_is_rejected() {
    // Both clauses hold, yet V4 -> V0 -> V5 -- V4 would be a partially directed cycle.
    let g = MixedGraph::parse("V4->V0, V0<->V5, V2").unwrap();
    let ps = PolicySet::new(vec![
        Policy::param("V4", vset(["V2", "V5"]), "f"),
        Policy::param("V5", vset(["V0", "V2", "V4"]), "f"),
    ])
    .unwrap();
    let c = is_segregation_preserving(&ps, &g).unwrap();
    assert!(matches!(c.violation, Some(Violation::ResultNotSg(_))), "{c:?}");
}
