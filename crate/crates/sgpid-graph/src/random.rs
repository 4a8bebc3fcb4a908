//! Seeded random graph generators for property tests and oracle harnesses.
//!
//! Every generator places vertices in a random total order and only draws
//! directed edges forward in that order, so the outputs never contain a
//! partially directed cycle.

use crate::{Edge, MixedGraph, VertexInfo};
use rand::seq::SliceRandom;
use rand::Rng;

/// Vertex names `V0, V1, ...` (zero padded when more than ten are needed).
fn names(n: usize, prefix: &str) -> Vec<String> {
    let width = if n > 10 { 2 } else { 1 };
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

fn shuffled<R: Rng + ?Sized>(rng: &mut R, n: usize, prefix: &str) -> Vec<String> {
    let mut v = names(n, prefix);
    v.shuffle(rng);
    v
}

/// A random DAG on `n` vertices with forward-edge probability `p`.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> MixedGraph {
    random_admg(rng, n, p, 0.0)
}

/// A random ADMG: forward directed edges with probability `p_dir`, bidirected
/// edges with probability `p_bi`.
pub fn random_admg<R: Rng + ?Sized>(rng: &mut R, n: usize, p_dir: f64, p_bi: f64) -> MixedGraph {
    let order = shuffled(rng, n, "V");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_dir) {
                edges.push(Edge::directed(order[i].clone(), order[j].clone()));
            }
            if rng.random_bool(p_bi) {
                edges.push(Edge::bidirected(order[i].clone(), order[j].clone()));
            }
        }
    }
    MixedGraph::new(order.into_iter().map(VertexInfo::observed), edges, Vec::<String>::new()).expect("valid by construction")
}

/// Splits an ordered vertex list into consecutive groups of size 1 to 3; a
/// group of size > 1 becomes a nontrivial block with probability `p_block`.
fn random_blocks<R: Rng + ?Sized>(rng: &mut R, order: &[String], p_block: f64) -> Vec<Vec<String>> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let size = if rng.random_bool(p_block) { rng.random_range(2..=3).min(order.len() - i) } else { 1 };
        groups.push(order[i..i + size].to_vec());
        i += size;
    }
    groups
}

fn block_edges<R: Rng + ?Sized>(rng: &mut R, block: &[String]) -> Vec<Edge> {
    let mut edges = Vec::new();
    for k in 1..block.len() {
        let j = rng.random_range(0..k);
        edges.push(Edge::undirected(block[j].clone(), block[k].clone()));
    }
    for a in 0..block.len() {
        for b in a + 1..block.len() {
            if rng.random_bool(0.3) {
                edges.push(Edge::undirected(block[a].clone(), block[b].clone()));
            }
        }
    }
    edges
}

/// A random segregated graph: consecutive vertices grouped into blocks,
/// forward directed edges between different blocks with probability `p_dir`,
/// and bidirected edges among trivial-block vertices with probability `p_bi`.
pub fn random_sg<R: Rng + ?Sized>(rng: &mut R, n: usize, p_dir: f64, p_bi: f64, p_block: f64) -> MixedGraph {
    let order = shuffled(rng, n, "V");
    let groups = random_blocks(rng, &order, p_block);
    let mut edges = Vec::new();
    let mut group_of = std::collections::BTreeMap::new();
    for (gi, grp) in groups.iter().enumerate() {
        edges.extend(block_edges(rng, grp));
        for v in grp {
            group_of.insert(v.clone(), gi);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&order[i], &order[j]);
            if group_of[a] != group_of[b] && rng.random_bool(p_dir) {
                edges.push(Edge::directed(a.clone(), b.clone()));
            }
            let trivial = groups[group_of[a]].len() == 1 && groups[group_of[b]].len() == 1;
            if trivial && rng.random_bool(p_bi) {
                edges.push(Edge::bidirected(a.clone(), b.clone()));
            }
        }
    }
    MixedGraph::new(order.into_iter().map(VertexInfo::observed), edges, Vec::<String>::new()).expect("valid by construction")
}

/// A random block-safe latent-variable chain graph: `n` observed vertices
/// laid out as in [`random_sg`] without bidirected edges, plus up to
/// `max_latents` latent roots named `H0, H1, ...`, each pointing into two or
/// more observed trivial-block vertices.
pub fn random_block_safe_lvcg<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    p_dir: f64,
    p_block: f64,
    max_latents: usize,
) -> MixedGraph {
    let base = random_sg(rng, n, p_dir, 0.0, p_block);
    let trivial: Vec<String> = base.district_vertices().into_iter().collect();
    let mut g = base;
    if trivial.len() < 2 {
        return g;
    }
    let k = rng.random_range(0..=max_latents);
    for h in 0..k {
        let name = format!("H{h}");
        let mut children = trivial.clone();
        children.shuffle(rng);
        let count = rng.random_range(2..=children.len().min(3));
        g = g.with_vertex(VertexInfo::latent(name.clone())).expect("fresh latent name");
        g = g
            .with_edges(children[..count].iter().map(|c| Edge::directed(name.clone(), c.clone())))
            .expect("valid latent edges");
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GraphClass;
    use rand::SeedableRng;

    #[test]
    fn generators_produce_their_classes() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..50 {
            assert!(random_dag(&mut rng, 6, 0.4).classify().is(GraphClass::DAG));
            assert!(random_admg(&mut rng, 6, 0.4, 0.3).classify().is(GraphClass::ADMG));
            assert!(random_sg(&mut rng, 7, 0.4, 0.3, 0.4).classify().is(GraphClass::SG));
            let lv = random_block_safe_lvcg(&mut rng, 6, 0.4, 0.4, 2);
            assert!(lv.classify().is(GraphClass::CG));
        }
    }
}
