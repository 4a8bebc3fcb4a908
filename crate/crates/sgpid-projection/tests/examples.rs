//! Projection and decomposition on the shipped example graphs.

use sgpid_graph::{vset, EdgeKind, MixedGraph, VSet};
use sgpid_projection::{decompose, latent_project};
use std::path::PathBuf;

fn corpus(name: &str) -> MixedGraph {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/graphs").join(format!("{name}.json"));
    MixedGraph::load(path).unwrap()
}

/// Edges with at least one random endpoint.
fn random_edges(g: &MixedGraph) -> Vec<String> {
    let fixed = g.fixed();
    g.edges().filter(|e| !(fixed.contains(&e.tail) && fixed.contains(&e.head))).map(|e| e.to_string()).collect()
}

#[test]
fn fig1a_projects_to_fig1b() {
    assert_eq!(latent_project(&corpus("fig1a")).unwrap(), corpus("fig1b"));
}

#[test]
fn fig2a_block_component_matches_drawing() {
    let d = decompose(&corpus("fig2a")).unwrap();
    let drawn = corpus("fig2b");
    assert_eq!(d.b_star, vset(["C2", "C3", "M1", "M2", "M3"]));
    assert_eq!(d.ccg.random(), drawn.random());
    assert_eq!(d.ccg.fixed(), drawn.fixed());
    assert_eq!(random_edges(&d.ccg), random_edges(&drawn));
}

#[test]
fn fig2a_district_component_matches_drawing() {
    let d = decompose(&corpus("fig2a")).unwrap();
    let drawn = corpus("fig2c");
    assert_eq!(d.d_star, vset(["A1", "A2", "A3", "C1", "Y1", "Y2", "Y3"]));
    assert_eq!(d.cadmg.random(), drawn.random());
    assert_eq!(d.cadmg.fixed(), drawn.fixed());
    assert_eq!(random_edges(&d.cadmg), random_edges(&drawn));
}

#[test]
fn decomposition_covers_every_vertex_and_edge() {
    for name in ["fig1b", "fig1c", "fig2a", "fig2d", "frontdoor", "bow"] {
        let g = corpus(name);
        let d = decompose(&g).unwrap();
        let union: VSet = d.b_star.union(&d.d_star).cloned().collect();
        assert_eq!(union, g.names(), "{name}");
        assert!(d.b_star.is_disjoint(&d.d_star));
        // Every edge of g with a head in a component, or undirected/bidirected
        // inside one, appears in that component.
        for e in g.edges() {
            let in_ccg = d.ccg.edges().any(|f| f == e);
            let in_cadmg = d.cadmg.edges().any(|f| f == e);
            match e.kind {
                EdgeKind::Directed => assert!(in_ccg || in_cadmg || g.is_fixed(&e.head), "{name}: {e}"),
                _ => assert!(in_ccg || in_cadmg, "{name}: {e}"),
            }
        }
    }
}
