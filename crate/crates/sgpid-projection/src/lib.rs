//! Latent projection and segregated decomposition.
//!
//! [`latent_project`] replaces latent vertices of a latent-variable DAG or a
//! block-safe latent-variable chain graph by directed and bidirected edges
//! among the observed vertices. [`decompose`] splits a segregated graph into
//! its conditional chain graph over the nontrivial blocks and its conditional
//! ADMG over the districts.

use serde::Serialize;
use sgpid_graph::{Edge, EdgeKind, GraphClass, GraphError, MixedGraph, Relation, VSet, VertexInfo};
use std::collections::BTreeMap;

/// Errors raised by projection and decomposition.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjectionError {
    #[error("graph is not block-safe: offending edge {0}")]
    NotBlockSafe(Edge),
    #[error("latent vertex in undirected edge {0}")]
    LatentUndirected(Edge),
    #[error("input is not a segregated graph: {0}")]
    NotSegregated(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, ProjectionError>;

/// Outcome of the block-safety check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockSafety {
    pub safe: bool,
    /// The first offending edge when `safe` is false.
    pub witness: Option<Edge>,
}

/// Checks that no latent vertex touches an undirected edge and no observed
/// vertex in a nontrivial block has a latent parent.
pub fn is_block_safe(g: &MixedGraph) -> BlockSafety {
    let latent = g.latents();
    if let Some(e) = g.edges_of(EdgeKind::Undirected).find(|e| latent.contains(&e.tail) || latent.contains(&e.head)) {
        return BlockSafety { safe: false, witness: Some(e.clone()) };
    }
    let in_blocks = g.block_vertices();
    let bad = g
        .edges_of(EdgeKind::Directed)
        .find(|e| latent.contains(&e.tail) && in_blocks.contains(&e.head) && !latent.contains(&e.head));
    match bad {
        Some(e) => BlockSafety { safe: false, witness: Some(e.clone()) },
        None => BlockSafety { safe: true, witness: None },
    }
}

/// Projects out the latent vertices.
///
/// Observed `A -> B` appears iff a directed path from `A` to `B` has only
/// latent intermediates. Observed `A <-> B` appears iff some latent reaches
/// both along directed paths with only latent intermediates, or the edge
/// already exists. A bidirected edge touching a latent is first replaced by a
/// fresh latent parent of both endpoints. Undirected edges among observed
/// vertices are kept.
pub fn latent_project(g: &MixedGraph) -> Result<MixedGraph> {
    let latent = g.latents();
    if latent.is_empty() {
        return Ok(g.clone());
    }
    if let Some(e) = g.edges_of(EdgeKind::Undirected).find(|e| latent.contains(&e.tail) || latent.contains(&e.head)) {
        return Err(ProjectionError::LatentUndirected(e.clone()));
    }
    let safety = is_block_safe(g);
    if !safety.safe {
        return Err(ProjectionError::NotBlockSafe(safety.witness.expect("witness on failure")));
    }

    // Directed successor lists, with latent-touching bidirected edges turned
    // into virtual latent sources.
    let mut succ: BTreeMap<String, Vec<String>> = g.names().into_iter().map(|v| (v, Vec::new())).collect();
    for e in g.edges_of(EdgeKind::Directed) {
        succ.get_mut(&e.tail).unwrap().push(e.head.clone());
    }
    let mut sources: Vec<(String, Vec<String>)> = latent.iter().map(|h| (h.clone(), Vec::new())).collect();
    let mut observed_bi: Vec<Edge> = Vec::new();
    for e in g.edges_of(EdgeKind::Bidirected) {
        if latent.contains(&e.tail) || latent.contains(&e.head) {
            sources.push((String::new(), vec![e.tail.clone(), e.head.clone()]));
        } else {
            observed_bi.push(e.clone());
        }
    }

    // Observed vertices reachable from `start` through latent intermediates.
    let reach = |starts: &[String]| -> VSet {
        let mut out = VSet::new();
        let mut seen = VSet::new();
        let mut stack: Vec<String> = starts.to_vec();
        while let Some(v) = stack.pop() {
            if !latent.contains(&v) {
                out.insert(v);
                continue;
            }
            if !seen.insert(v.clone()) {
                continue;
            }
            stack.extend(succ[&v].iter().cloned());
        }
        out
    };

    let observed = g.observed();
    let mut edges: Vec<Edge> = Vec::new();
    for a in &observed {
        for b in reach(&succ[a]) {
            edges.push(Edge::directed(a.clone(), b));
        }
    }
    for (h, extra) in &sources {
        let starts: Vec<String> = if h.is_empty() { extra.clone() } else { succ[h].clone() };
        let hit: Vec<String> = reach(&starts).into_iter().collect();
        for i in 0..hit.len() {
            for j in i + 1..hit.len() {
                edges.push(Edge::bidirected(hit[i].clone(), hit[j].clone()));
            }
        }
    }
    edges.extend(observed_bi);
    edges.extend(g.edges_of(EdgeKind::Undirected).cloned());
    let vertices: Vec<VertexInfo> = g.vertices().filter(|v| !v.latent).cloned().collect();
    let fixed: Vec<String> = g.fixed().intersection(&observed).cloned().collect();
    Ok(MixedGraph::new(vertices, edges, fixed)?)
}

/// The segregated decomposition of an SG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegregatedDecomposition {
    /// Union of the nontrivial blocks.
    pub b_star: VSet,
    /// Union of the districts.
    pub d_star: VSet,
    /// Conditional chain graph: random `b_star`, fixed `pa^s(b_star)`.
    pub ccg: MixedGraph,
    /// Conditional ADMG: random `d_star`, fixed `pa^s(d_star)`.
    pub cadmg: MixedGraph,
}

/// Strict parents: `pa(s) \ s`.
pub fn strict_parents(g: &MixedGraph, s: &VSet) -> Result<VSet> {
    Ok(g.relatives(s, Relation::Parents)?.difference(s).cloned().collect())
}

/// The conditional graph with random set `random` and fixed set
/// `pa^s(random)`, keeping every edge of `g` among these vertices except
/// edges from a random vertex into a fixed one.
pub fn conditional_graph(g: &MixedGraph, random: &VSet) -> Result<MixedGraph> {
    let fixed = strict_parents(g, random)?;
    let keep: VSet = random.union(&fixed).cloned().collect();
    let vertices: Vec<VertexInfo> = g.vertices().filter(|v| keep.contains(&v.name)).cloned().collect();
    let edges: Vec<Edge> = g
        .edges()
        .filter(|e| keep.contains(&e.tail) && keep.contains(&e.head))
        .filter(|e| {
            let tail_fixed = fixed.contains(&e.tail);
            let head_fixed = fixed.contains(&e.head);
            match e.kind {
                EdgeKind::Directed => !(head_fixed && !tail_fixed),
                _ => tail_fixed == head_fixed,
            }
        })
        .cloned()
        .collect();
    Ok(MixedGraph::new(vertices, edges, fixed)?)
}

/// Splits an SG into its block and district components.
pub fn decompose(g: &MixedGraph) -> Result<SegregatedDecomposition> {
    let report = g.classify();
    if !report.is(GraphClass::SG) {
        let why = if !report.segregated {
            "a vertex has both undirected and bidirected edges".to_string()
        } else if report.partially_directed_cycle {
            "partially directed cycle present".to_string()
        } else {
            "fixed vertices present".to_string()
        };
        return Err(ProjectionError::NotSegregated(why));
    }
    let b_star = g.block_vertices();
    let d_star = g.district_vertices();
    let ccg = conditional_graph(g, &b_star)?;
    let cadmg = conditional_graph(g, &d_star)?;
    Ok(SegregatedDecomposition { b_star, d_star, ccg, cadmg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sgpid_graph::vset;

    #[test]
    fn confounder_projects_to_bidirected_edge() {
        let g = MixedGraph::parse("H->A, H->B").unwrap().with_latent(["H"]).unwrap();
        assert_eq!(latent_project(&g).unwrap(), MixedGraph::parse("A<->B").unwrap());
    }

    #[test]
    fn latent_mediator_projects_to_directed_edge() {
        let g = MixedGraph::parse("A->H, H->B, H->C").unwrap().with_latent(["H"]).unwrap();
        assert_eq!(latent_project(&g).unwrap(), MixedGraph::parse("A->B, A->C, B<->C").unwrap());
    }

    #[test]
    fn no_latents_is_identity() {
        let g = MixedGraph::parse("A->B, B--C, D<->A").unwrap();
        assert_eq!(latent_project(&g).unwrap(), g);
    }

    #[test]
    fn bidirected_edge_on_latent_becomes_shared_source() {
        let g = MixedGraph::parse("H<->A, H->B").unwrap().with_latent(["H"]).unwrap();
        assert_eq!(latent_project(&g).unwrap(), MixedGraph::parse("A<->B").unwrap());
    }

    #[test]
    fn block_safety_witnesses() {
        let g = MixedGraph::parse("H--X").unwrap().with_latent(["H"]).unwrap();
        let s = is_block_safe(&g);
        assert!(!s.safe);
        assert_eq!(s.witness, Some(Edge::undirected("H", "X")));
        assert!(matches!(latent_project(&g), Err(ProjectionError::LatentUndirected(_))));

        let g = MixedGraph::parse("H->X, X--Y").unwrap().with_latent(["H"]).unwrap();
        assert_eq!(is_block_safe(&g).witness, Some(Edge::directed("H", "X")));
        assert!(matches!(latent_project(&g), Err(ProjectionError::NotBlockSafe(_))));

        assert!(is_block_safe(&MixedGraph::parse("A->B, B--C").unwrap()).safe);
    }

    #[test]
    fn decompose_dag_and_mrf() {
        let dag = MixedGraph::parse("A->B, B->C").unwrap();
        let d = decompose(&dag).unwrap();
        assert!(d.b_star.is_empty());
        assert_eq!(d.cadmg, dag);
        let mrf = MixedGraph::parse("A--B, B--C").unwrap();
        let d = decompose(&mrf).unwrap();
        assert!(d.d_star.is_empty());
        assert_eq!(d.b_star, vset(["A", "B", "C"]));
    }

    #[test]
    fn decompose_rejects_non_segregated() {
        let g = MixedGraph::parse("A--B, A<->C").unwrap();
        assert!(matches!(decompose(&g), Err(ProjectionError::NotSegregated(_))));
    }
}
