//! Worked examples on the shipped example graphs.

use sgpid_graph::{vset, GraphClass, MixedGraph, Relation, VSet};
use std::path::PathBuf;

fn corpus(name: &str) -> MixedGraph {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/graphs").join(format!("{name}.json"));
    MixedGraph::load(path).unwrap()
}

#[test]
fn fig2a_district_of_y2() {
    let g = corpus("fig2a");
    assert_eq!(g.relatives(&vset(["Y2"]), Relation::District).unwrap(), vset(["A2", "Y2", "Y3"]));
}

#[test]
fn fig2a_nontrivial_blocks_and_districts() {
    let g = corpus("fig2a");
    let mut blocks = g.nontrivial_blocks();
    blocks.sort();
    assert_eq!(blocks, vec![vset(["C2", "C3"]), vset(["M1", "M2", "M3"])]);
    assert_eq!(g.districts(), vec![vset(["A1", "C1", "Y1"]), vset(["A2", "Y2", "Y3"]), vset(["A3"])]);
    let partition: VSet = g.districts().into_iter().chain(blocks).flatten().collect();
    assert_eq!(partition, g.names());
}

#[test]
fn fig2a_is_segregated() {
    let r = corpus("fig2a").classify();
    assert!(r.segregated && !r.partially_directed_cycle);
    assert!(r.is(GraphClass::SG));
}

#[test]
fn fig2d_outcome_anterior_without_targets() {
    let g = corpus("fig2d");
    let targets = vset(["A1", "A2", "A3", "M2"]);
    let rest: VSet = g.names().difference(&targets).cloned().collect();
    let sub = g.induced_subgraph(&rest).unwrap();
    let ant = sub.relatives(&vset(["Y2", "Y3"]), Relation::Anterior).unwrap();
    assert_eq!(ant, vset(["C2", "C3", "M3", "Y2", "Y3"]));
    // Anterior in the full post-intervention graph, minus targets, agrees.
    let full: VSet = g.anterior(&vset(["Y2", "Y3"])).difference(&targets).cloned().collect();
    assert_eq!(full, ant);
}

#[test]
fn fig2e_is_the_outcome_subgraph_of_fig2d() {
    let g = corpus("fig2d");
    let e = g.induced_subgraph(&vset(["C2", "C3", "M3", "Y2", "Y3"])).unwrap();
    assert_eq!(e, corpus("fig2e"));
    assert_eq!(e.districts(), vec![vset(["M3"]), vset(["Y2", "Y3"])]);
}

#[test]
fn fig2a_augmented_graph_of_covariate_block() {
    let g = corpus("fig2a");
    let a = g.augmented_graph(&vset(["C2", "C3"])).unwrap();
    assert_eq!(a, MixedGraph::parse("C2--C3").unwrap());
}

#[test]
fn fig1b_block_order_ends_with_outcome_block() {
    let g = corpus("fig1b");
    let order = g.block_topological_order().unwrap();
    assert_eq!(
        order,
        vec![vset(["C_l"]), vset(["C_r"]), vset(["A_l"]), vset(["A_r"]), vset(["Y_l", "Y_r"])]
    );
}

#[test]
fn fig1_graphs_classify() {
    assert!(corpus("fig1a").classify().is(GraphClass::CG));
    assert!(corpus("fig1b").classify().is(GraphClass::SG));
    assert!(corpus("fig1c").classify().is(GraphClass::CG));
    assert_eq!(corpus("fig1a").latents(), vset(["H_l", "H_r"]));
}

#[test]
fn conditional_graphs_classify() {
    assert!(corpus("fig2b").classify().is(GraphClass::CCG));
    assert!(corpus("fig2c").classify().is(GraphClass::CADMG));
}
