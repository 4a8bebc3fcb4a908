//! Blocks, districts, classification, block orders, augmented graphs and cliques.

use crate::{Edge, EdgeKind, GraphError, MixedGraph, Result, VSet, VertexInfo};
use std::collections::{BTreeMap, BTreeSet};

/// Graph classes recognized by [`MixedGraph::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum GraphClass {
    DAG,
    MRF,
    CG,
    ADMG,
    CADMG,
    CCG,
    SG,
}

/// Structural facts about a graph and the classes it belongs to.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct GraphReport {
    /// No vertex has both an undirected and a bidirected incident edge.
    pub segregated: bool,
    /// Some partially directed cycle exists.
    pub partially_directed_cycle: bool,
    /// The directed edges alone form an acyclic graph.
    pub directed_acyclic: bool,
    pub has_directed: bool,
    pub has_bidirected: bool,
    pub has_undirected: bool,
    /// A fixed vertex set is present.
    pub has_context: bool,
    /// Every class the graph belongs to.
    pub classes: BTreeSet<GraphClass>,
}

impl GraphReport {
    pub fn is(&self, c: GraphClass) -> bool {
        self.classes.contains(&c)
    }

    /// The most specific class, if any.
    pub fn primary(&self) -> Option<GraphClass> {
        use GraphClass::*;
        [DAG, MRF, ADMG, CG, SG, CADMG, CCG].into_iter().find(|c| self.classes.contains(c))
    }
}

fn components<F>(members: &VSet, mut adjacent: F) -> Vec<VSet>
where
    F: FnMut(&str) -> Vec<String>,
{
    let mut seen = VSet::new();
    let mut out = Vec::new();
    for start in members {
        if seen.contains(start) {
            continue;
        }
        let mut comp = VSet::new();
        let mut stack = vec![start.clone()];
        seen.insert(start.clone());
        while let Some(v) = stack.pop() {
            for w in adjacent(&v) {
                if members.contains(&w) && seen.insert(w.clone()) {
                    stack.push(w);
                }
            }
            comp.insert(v);
        }
        out.push(comp);
    }
    out.sort();
    out
}

impl MixedGraph {
    /// Blocks: connected components of the random vertices under undirected
    /// edges, sorted by smallest member. Singletons are trivial blocks.
    pub fn blocks(&self) -> Vec<VSet> {
        let random = self.random();
        components(&random, |v| self.adj[v].neighbors.iter().cloned().collect())
    }

    /// Blocks with more than one member.
    pub fn nontrivial_blocks(&self) -> Vec<VSet> {
        self.blocks().into_iter().filter(|b| b.len() > 1).collect()
    }

    /// Union of the nontrivial blocks.
    pub fn block_vertices(&self) -> VSet {
        self.nontrivial_blocks().into_iter().flatten().collect()
    }

    /// Districts: bidirected components of the random vertices outside
    /// nontrivial blocks, sorted by smallest member.
    pub fn districts(&self) -> Vec<VSet> {
        let members: VSet = self.random().difference(&self.block_vertices()).cloned().collect();
        components(&members, |v| self.adj[v].siblings.iter().cloned().collect())
    }

    /// Union of the districts.
    pub fn district_vertices(&self) -> VSet {
        self.districts().into_iter().flatten().collect()
    }

    /// True if no vertex has both undirected and bidirected incident edges.
    pub fn is_segregated(&self) -> bool {
        self.adj.values().all(|a| a.neighbors.is_empty() || a.siblings.is_empty())
    }

    fn all_components_undirected(&self) -> (Vec<VSet>, BTreeMap<String, usize>) {
        let comps = components(&self.names(), |v| self.adj[v].neighbors.iter().cloned().collect());
        let mut index = BTreeMap::new();
        for (i, c) in comps.iter().enumerate() {
            for v in c {
                index.insert(v.clone(), i);
            }
        }
        (comps, index)
    }

    /// Finds a partially directed cycle, returned as the vertices of the
    /// undirected components it passes through (by smallest member).
    pub fn partially_directed_cycle(&self) -> Option<Vec<String>> {
        let (comps, index) = self.all_components_undirected();
        let n = comps.len();
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for e in self.edges_of(EdgeKind::Directed) {
            let (a, b) = (index[&e.tail], index[&e.head]);
            if a == b {
                return Some(vec![e.tail.clone(), e.head.clone()]);
            }
            succ[a].insert(b);
        }
        directed_cycle(&succ).map(|cyc| cyc.into_iter().map(|i| comps[i].iter().next().unwrap().clone()).collect())
    }

    /// True if the directed edges alone contain no cycle.
    pub fn directed_acyclic(&self) -> bool {
        let names: Vec<&String> = self.vertices.keys().collect();
        let pos: BTreeMap<&String, usize> = names.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); names.len()];
        for e in self.edges_of(EdgeKind::Directed) {
            succ[pos[&e.tail]].insert(pos[&e.head]);
        }
        directed_cycle(&succ).is_none()
    }

    /// Classifies the graph.
    pub fn classify(&self) -> GraphReport {
        let has_directed = self.edges_of(EdgeKind::Directed).next().is_some();
        let has_bidirected = self.edges_of(EdgeKind::Bidirected).next().is_some();
        let has_undirected = self.edges_of(EdgeKind::Undirected).next().is_some();
        let segregated = self.is_segregated();
        let pd_cycle = self.partially_directed_cycle().is_some();
        let directed_acyclic = self.directed_acyclic();
        let has_context = self.has_context();
        let random = self.random();
        let random_bidirected = self.edges_of(EdgeKind::Bidirected).any(|e| random.contains(&e.tail));
        let random_undirected = self.edges_of(EdgeKind::Undirected).any(|e| random.contains(&e.tail));
        let mut classes = BTreeSet::new();
        if !has_context {
            if !has_bidirected && !has_undirected && directed_acyclic {
                classes.insert(GraphClass::DAG);
            }
            if !has_directed && !has_bidirected {
                classes.insert(GraphClass::MRF);
            }
            if !has_bidirected && !pd_cycle {
                classes.insert(GraphClass::CG);
            }
            if !has_undirected && directed_acyclic {
                classes.insert(GraphClass::ADMG);
            }
            if segregated && !pd_cycle {
                classes.insert(GraphClass::SG);
            }
        } else {
            if !random_undirected && directed_acyclic && !pd_cycle {
                classes.insert(GraphClass::CADMG);
            }
            if !random_bidirected && !pd_cycle {
                classes.insert(GraphClass::CCG);
            }
        }
        GraphReport {
            segregated,
            partially_directed_cycle: pd_cycle,
            directed_acyclic,
            has_directed,
            has_bidirected,
            has_undirected,
            has_context,
            classes,
        }
    }

    /// Orders the blocks of the random vertices so that every directed edge
    /// between them goes from an earlier block to a later one. Ties go to the
    /// block with the lexicographically smallest member.
    pub fn block_topological_order(&self) -> Result<Vec<VSet>> {
        if let Some(cyc) = self.partially_directed_cycle() {
            return Err(GraphError::PartiallyDirectedCycle(cyc));
        }
        let blocks = self.blocks();
        let mut index = BTreeMap::new();
        for (i, b) in blocks.iter().enumerate() {
            for v in b {
                index.insert(v.as_str(), i);
            }
        }
        let mut indeg = vec![0usize; blocks.len()];
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); blocks.len()];
        for e in self.edges_of(EdgeKind::Directed) {
            if let (Some(&a), Some(&b)) = (index.get(e.tail.as_str()), index.get(e.head.as_str())) {
                if succ[a].insert(b) {
                    indeg[b] += 1;
                }
            }
        }
        // Blocks are sorted by smallest member, so the smallest ready index wins ties.
        let mut ready: BTreeSet<usize> = (0..blocks.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(blocks.len());
        while let Some(i) = ready.pop_first() {
            order.push(blocks[i].clone());
            for &j in &succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        Ok(order)
    }

    /// A total order on the random vertices: blocks in topological order,
    /// members of a block in name order.
    pub fn vertex_order(&self) -> Result<Vec<String>> {
        Ok(self.block_topological_order()?.into_iter().flatten().collect())
    }

    /// Depth of each random vertex: the length of the longest directed path in
    /// the block graph ending at its block. Fixed vertices get depth 0 and
    /// count as sources.
    pub fn block_depths(&self) -> Result<BTreeMap<String, usize>> {
        let order = self.block_topological_order()?;
        let mut depth: BTreeMap<String, usize> = self.fixed.iter().map(|f| (f.clone(), 0)).collect();
        for block in &order {
            let mut d = 0;
            for v in block {
                for p in &self.adj[v].parents {
                    if let Some(&dp) = depth.get(p) {
                        d = d.max(dp + 1);
                    }
                }
            }
            for v in block {
                depth.insert(v.clone(), d);
            }
        }
        Ok(depth)
    }

    /// The augmented (moral) graph of block `b`: an undirected graph on
    /// `b ∪ pa(b)` joining block-internal pairs, parents to children, and all
    /// parents pairwise.
    pub fn augmented_graph(&self, b: &VSet) -> Result<MixedGraph> {
        self.check_names(b)?;
        if !self.blocks().contains(b) {
            return Err(GraphError::NotABlock(b.iter().cloned().collect()));
        }
        let parents: VSet = self.relatives(b, crate::Relation::Parents)?.difference(b).cloned().collect();
        let mut edges = Vec::new();
        for e in self.edges() {
            let inside = b.contains(&e.tail) && b.contains(&e.head);
            let into = e.kind == EdgeKind::Directed && parents.contains(&e.tail) && b.contains(&e.head);
            if inside || into {
                edges.push(Edge::undirected(e.tail.clone(), e.head.clone()));
            }
        }
        let plist: Vec<&String> = parents.iter().collect();
        for i in 0..plist.len() {
            for j in i + 1..plist.len() {
                edges.push(Edge::undirected(plist[i].clone(), plist[j].clone()));
            }
        }
        let vertices: Vec<VertexInfo> = b.union(&parents).map(|v| VertexInfo { ..self.vertices[v].clone() }).collect();
        MixedGraph::new(vertices, edges, Vec::<String>::new())
    }

    /// Maximal cliques of an undirected graph, each sorted, listed in
    /// lexicographic order of their member lists.
    pub fn cliques(&self) -> Result<Vec<VSet>> {
        if let Some(e) = self.edges().find(|e| e.kind != EdgeKind::Undirected) {
            return Err(GraphError::NotUndirected(e.clone()));
        }
        let mut out = Vec::new();
        bron_kerbosch(self, VSet::new(), self.names(), VSet::new(), &mut out);
        out.sort_by(|a, b| a.iter().cmp(b.iter()));
        Ok(out)
    }
}

fn bron_kerbosch(g: &MixedGraph, r: VSet, mut p: VSet, mut x: VSet, out: &mut Vec<VSet>) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    let pivot = p.union(&x).max_by_key(|u| g.adj[*u].neighbors.intersection(&p).count()).cloned().unwrap();
    let candidates: Vec<String> = p.difference(&g.adj[&pivot].neighbors).cloned().collect();
    for v in candidates {
        let nv = &g.adj[&v].neighbors;
        let mut r2 = r.clone();
        r2.insert(v.clone());
        bron_kerbosch(g, r2, p.intersection(nv).cloned().collect(), x.intersection(nv).cloned().collect(), out);
        p.remove(&v);
        x.insert(v);
    }
}

/// Returns a directed cycle in a successor-list graph, if any.
fn directed_cycle(succ: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, Vec<usize>)> = vec![(root, succ[root].iter().copied().collect())];
        mark[root] = Mark::Active;
        while let Some((v, rest)) = stack.last_mut() {
            let v = *v;
            if let Some(w) = rest.pop() {
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        parent[w] = v;
                        stack.push((w, succ[w].iter().copied().collect()));
                    }
                    Mark::Active => {
                        let mut cyc = vec![w];
                        let mut u = v;
                        while u != w {
                            cyc.push(u);
                            u = parent[u];
                        }
                        cyc.reverse();
                        return Some(cyc);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use crate::{vset, GraphClass, MixedGraph, VSet};

    #[test]
    fn blocks_of_path_and_edgeless_graph() {
        let g = MixedGraph::parse("A--B, B--C").unwrap();
        assert_eq!(g.blocks(), vec![vset(["A", "B", "C"])]);
        let h = MixedGraph::parse("A->B, B<->C").unwrap();
        assert!(h.nontrivial_blocks().is_empty());
        assert_eq!(h.blocks().len(), 3);
    }

    #[test]
    fn districts_of_dag_are_singletons() {
        let g = MixedGraph::parse("A->B, B->C").unwrap();
        assert_eq!(g.districts(), vec![vset(["A"]), vset(["B"]), vset(["C"])]);
    }

    #[test]
    fn classify_detects_partially_directed_cycle() {
        let g = MixedGraph::parse("W->X, X--Y, Y->W").unwrap();
        let r = g.classify();
        assert!(r.partially_directed_cycle);
        assert!(!r.is(GraphClass::SG));
        assert!(g.block_topological_order().is_err());
    }

    #[test]
    fn classify_detects_non_segregation() {
        let r = MixedGraph::parse("A--B, A<->C").unwrap().classify();
        assert!(!r.segregated);
        assert!(!r.is(GraphClass::SG));
    }

    #[test]
    fn dag_belongs_to_every_super_class() {
        let r = MixedGraph::parse("A->B, B->C, A->C").unwrap().classify();
        for c in [GraphClass::DAG, GraphClass::CG, GraphClass::ADMG, GraphClass::SG] {
            assert!(r.is(c), "{c:?}");
        }
        assert_eq!(r.primary(), Some(GraphClass::DAG));
    }

    #[test]
    fn directed_edge_inside_block_is_a_cycle() {
        let g = MixedGraph::parse("A--B, B--C, A->C").unwrap();
        assert!(g.partially_directed_cycle().is_some());
    }

    #[test]
    fn block_order_of_chain() {
        let g = MixedGraph::parse("C->A, A->Y").unwrap();
        assert_eq!(g.block_topological_order().unwrap(), vec![vset(["C"]), vset(["A"]), vset(["Y"])]);
        let d = g.block_depths().unwrap();
        assert_eq!((d["C"], d["A"], d["Y"]), (0, 1, 2));
    }

    #[test]
    fn augmented_graph_moralizes_block() {
        let g = MixedGraph::parse("A->B, B--C, D->C").unwrap();
        let a = g.augmented_graph(&vset(["B", "C"])).unwrap();
        let want = MixedGraph::parse("A--B, C--D, A--D, B--C").unwrap();
        assert_eq!(a, want);
        let t = MixedGraph::parse("P->X").unwrap().augmented_graph(&vset(["X"])).unwrap();
        assert_eq!(t, MixedGraph::parse("P--X").unwrap());
        assert!(g.augmented_graph(&vset(["B"])).is_err());
    }

    #[test]
    fn cliques_examples() {
        let tri = MixedGraph::parse("A--B, B--C, A--C").unwrap();
        assert_eq!(tri.cliques().unwrap(), vec![vset(["A", "B", "C"])]);
        let path = MixedGraph::parse("A--B, B--C").unwrap();
        assert_eq!(path.cliques().unwrap(), vec![vset(["A", "B"]), vset(["B", "C"])]);
        let bare = MixedGraph::parse("A, B").unwrap();
        assert_eq!(bare.cliques().unwrap(), vec![vset(["A"]), vset(["B"])]);
        assert!(MixedGraph::parse("A->B").unwrap().cliques().is_err());
    }

    #[test]
    fn fixed_vertices_are_outside_blocks_and_districts() {
        let g = MixedGraph::parse("W->A, A<->B").unwrap().with_fixed(["W"]).unwrap();
        let all: VSet = g.blocks().into_iter().flatten().collect();
        assert_eq!(all, vset(["A", "B"]));
        assert_eq!(g.districts(), vec![vset(["A", "B"])]);
        assert!(g.classify().is(GraphClass::CADMG));
    }
}
