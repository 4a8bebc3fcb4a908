//! Mixed graphs carrying directed (`->`), bidirected (`<->`) and undirected
//! (`--`) edges, with an optional split of the vertices into random and fixed
//! sets.
//!
//! One type, [`MixedGraph`], serves every role used downstream: DAGs, chain
//! graphs, ADMGs, segregated graphs and their conditional variants. Graphs are
//! immutable values; every editing method returns a new graph. All collections
//! iterate in lexicographic name order so results are reproducible.

mod relations;
mod structure;

pub mod random;

pub use relations::Relation;
pub use structure::{GraphClass, GraphReport};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

/// A set of vertex names in lexicographic order.
pub type VSet = BTreeSet<String>;

/// Builds a [`VSet`] from anything yielding string-like items.
pub fn vset<I, S>(items: I) -> VSet
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    items.into_iter().map(Into::into).collect()
}

/// Errors raised by graph construction and queries.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("vertex names must be nonempty")]
    EmptyName,
    #[error("vertex `{0}` has cardinality {1}; at least 1 is required")]
    InvalidCardinality(String, usize),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("edge {0} points from a random vertex into a fixed vertex")]
    EdgeIntoFixed(Edge),
    #[error("unknown relation kind `{0}`")]
    UnknownRelation(String),
    #[error("partially directed cycle through {0:?}")]
    PartiallyDirectedCycle(Vec<String>),
    #[error("{0:?} is not a block of the graph")]
    NotABlock(Vec<String>),
    #[error("edge {0} is not undirected")]
    NotUndirected(Edge),
    #[error("cannot fix `{0}`: vertex is not random")]
    NotRandom(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// The three edge kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Directed,
    Bidirected,
    Undirected,
}

impl EdgeKind {
    /// The textual connector used by [`MixedGraph::parse`] and `Display`.
    pub fn symbol(self) -> &'static str {
        match self {
            EdgeKind::Directed => "->",
            EdgeKind::Bidirected => "<->",
            EdgeKind::Undirected => "--",
        }
    }
}

/// An edge. Bidirected and undirected edges are stored with `tail < head`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub tail: String,
    pub head: String,
    pub kind: EdgeKind,
}

impl Edge {
    /// Creates an edge, normalizing the endpoint order of unordered kinds.
    pub fn new(tail: impl Into<String>, head: impl Into<String>, kind: EdgeKind) -> Edge {
        let (mut tail, mut head) = (tail.into(), head.into());
        if kind != EdgeKind::Directed && head < tail {
            std::mem::swap(&mut tail, &mut head);
        }
        Edge { tail, head, kind }
    }

    pub fn directed(tail: impl Into<String>, head: impl Into<String>) -> Edge {
        Edge::new(tail, head, EdgeKind::Directed)
    }

    pub fn bidirected(a: impl Into<String>, b: impl Into<String>) -> Edge {
        Edge::new(a, b, EdgeKind::Bidirected)
    }

    pub fn undirected(a: impl Into<String>, b: impl Into<String>) -> Edge {
        Edge::new(a, b, EdgeKind::Undirected)
    }

    /// True if `v` is an endpoint.
    pub fn touches(&self, v: &str) -> bool {
        self.tail == v || self.head == v
    }

    /// The endpoint opposite to `v`, if `v` is an endpoint.
    pub fn other(&self, v: &str) -> Option<&str> {
        if self.tail == v {
            Some(&self.head)
        } else if self.head == v {
            Some(&self.tail)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.tail, self.kind.symbol(), self.head)
    }
}

fn default_cardinality() -> usize {
    2
}

/// A vertex with its latent flag and finite state-space size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexInfo {
    pub name: String,
    #[serde(default)]
    pub latent: bool,
    #[serde(default = "default_cardinality")]
    pub cardinality: usize,
}

impl VertexInfo {
    /// An observed binary vertex.
    pub fn observed(name: impl Into<String>) -> VertexInfo {
        VertexInfo { name: name.into(), latent: false, cardinality: 2 }
    }

    /// A latent binary vertex.
    pub fn latent(name: impl Into<String>) -> VertexInfo {
        VertexInfo { name: name.into(), latent: true, cardinality: 2 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Adjacency {
    parents: VSet,
    children: VSet,
    siblings: VSet,
    neighbors: VSet,
}

/// A mixed graph with an optional fixed (context) vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct MixedGraph {
    vertices: BTreeMap<String, VertexInfo>,
    edges: BTreeSet<Edge>,
    fixed: VSet,
    adj: BTreeMap<String, Adjacency>,
}

/// On-disk JSON layout of a graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<VertexInfo>,
    edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    fixed: Vec<String>,
}

impl TryFrom<GraphFile> for MixedGraph {
    type Error = GraphError;
    fn try_from(f: GraphFile) -> Result<MixedGraph> {
        MixedGraph::new(f.vertices, f.edges, f.fixed)
    }
}

impl From<MixedGraph> for GraphFile {
    fn from(g: MixedGraph) -> GraphFile {
        GraphFile {
            vertices: g.vertices.into_values().collect(),
            edges: g.edges.into_iter().collect(),
            fixed: g.fixed.into_iter().collect(),
        }
    }
}

impl MixedGraph {
    /// Builds a graph, validating names, endpoints and the fixed-set convention.
    pub fn new<V, E, F, S>(vertices: V, edges: E, fixed: F) -> Result<MixedGraph>
    where
        V: IntoIterator<Item = VertexInfo>,
        E: IntoIterator<Item = Edge>,
        F: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vmap = BTreeMap::new();
        for v in vertices {
            if v.name.is_empty() {
                return Err(GraphError::EmptyName);
            }
            if v.cardinality == 0 {
                return Err(GraphError::InvalidCardinality(v.name, 0));
            }
            if vmap.contains_key(&v.name) {
                return Err(GraphError::DuplicateVertex(v.name));
            }
            vmap.insert(v.name.clone(), v);
        }
        let mut fixed_set = VSet::new();
        for f in fixed {
            let f = f.into();
            if !vmap.contains_key(&f) {
                return Err(GraphError::UnknownVertex(f));
            }
            fixed_set.insert(f);
        }
        let mut edge_set = BTreeSet::new();
        for e in edges {
            let e = Edge::new(e.tail, e.head, e.kind);
            for end in [&e.tail, &e.head] {
                if !vmap.contains_key(end) {
                    return Err(GraphError::UnknownVertex(end.clone()));
                }
            }
            if e.tail == e.head {
                return Err(GraphError::SelfLoop(e.tail));
            }
            let tail_fixed = fixed_set.contains(&e.tail);
            let head_fixed = fixed_set.contains(&e.head);
            let into_fixed = match e.kind {
                EdgeKind::Directed => head_fixed && !tail_fixed,
                _ => head_fixed != tail_fixed,
            };
            if into_fixed {
                return Err(GraphError::EdgeIntoFixed(e));
            }
            edge_set.insert(e);
        }
        Ok(MixedGraph::assemble(vmap, edge_set, fixed_set))
    }

    fn assemble(vertices: BTreeMap<String, VertexInfo>, edges: BTreeSet<Edge>, fixed: VSet) -> MixedGraph {
        let mut adj: BTreeMap<String, Adjacency> =
            vertices.keys().map(|k| (k.clone(), Adjacency::default())).collect();
        for e in &edges {
            match e.kind {
                EdgeKind::Directed => {
                    adj.get_mut(&e.tail).unwrap().children.insert(e.head.clone());
                    adj.get_mut(&e.head).unwrap().parents.insert(e.tail.clone());
                }
                EdgeKind::Bidirected => {
                    adj.get_mut(&e.tail).unwrap().siblings.insert(e.head.clone());
                    adj.get_mut(&e.head).unwrap().siblings.insert(e.tail.clone());
                }
                EdgeKind::Undirected => {
                    adj.get_mut(&e.tail).unwrap().neighbors.insert(e.head.clone());
                    adj.get_mut(&e.head).unwrap().neighbors.insert(e.tail.clone());
                }
            }
        }
        MixedGraph { vertices, edges, fixed, adj }
    }

    /// The empty graph.
    pub fn empty() -> MixedGraph {
        MixedGraph::assemble(BTreeMap::new(), BTreeSet::new(), VSet::new())
    }

    /// Parses a compact edge list such as `"A->B, B<->C, C--D, E"`.
    ///
    /// Items are separated by commas, semicolons or newlines. A bare name
    /// declares an isolated vertex. All vertices are observed and binary.
    pub fn parse(spec: &str) -> Result<MixedGraph> {
        let mut names = VSet::new();
        let mut edges = Vec::new();
        for item in spec.split([',', ';', '\n']).map(str::trim).filter(|s| !s.is_empty()) {
            let found = ["<->", "->", "<-", "--"].iter().find_map(|sym| item.find(sym).map(|i| (i, *sym)));
            match found {
                None => {
                    if item.contains(char::is_whitespace) {
                        return Err(GraphError::Parse(format!("bad vertex name `{item}`")));
                    }
                    names.insert(item.to_string());
                }
                Some((i, sym)) => {
                    let a = item[..i].trim();
                    let b = item[i + sym.len()..].trim();
                    if a.is_empty() || b.is_empty() {
                        return Err(GraphError::Parse(format!("bad edge `{item}`")));
                    }
                    names.insert(a.to_string());
                    names.insert(b.to_string());
                    edges.push(match sym {
                        "->" => Edge::directed(a, b),
                        "<-" => Edge::directed(b, a),
                        "<->" => Edge::bidirected(a, b),
                        _ => Edge::undirected(a, b),
                    });
                }
            }
        }
        MixedGraph::new(names.into_iter().map(VertexInfo::observed), edges, Vec::<String>::new())
    }

    /// Parses a graph from its JSON document.
    pub fn from_json(text: &str) -> Result<MixedGraph> {
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))
    }

    /// Serializes the graph to pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serialization cannot fail")
    }

    /// Reads a graph from a JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<MixedGraph> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| GraphError::Io { path: path.display().to_string(), message: e.to_string() })?;
        MixedGraph::from_json(&text)
    }

    /// Writes the graph as JSON.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| GraphError::Io { path: path.display().to_string(), message: e.to_string() })
    }

    /// Returns a copy with the named vertices marked latent.
    pub fn with_latent<I, S>(&self, names: I) -> Result<MixedGraph>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vertices = self.vertices.clone();
        for n in names {
            let n = n.as_ref();
            vertices.get_mut(n).ok_or_else(|| GraphError::UnknownVertex(n.to_string()))?.latent = true;
        }
        Ok(MixedGraph::assemble(vertices, self.edges.clone(), self.fixed.clone()))
    }

    /// Returns a copy with the given fixed set, validated.
    pub fn with_fixed<I, S>(&self, fixed: I) -> Result<MixedGraph>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MixedGraph::new(self.vertices.values().cloned(), self.edges.iter().cloned(), fixed)
    }

    /// Returns a copy with the cardinality of `name` changed.
    pub fn with_cardinality(&self, name: &str, cardinality: usize) -> Result<MixedGraph> {
        if cardinality == 0 {
            return Err(GraphError::InvalidCardinality(name.to_string(), 0));
        }
        let mut vertices = self.vertices.clone();
        vertices.get_mut(name).ok_or_else(|| GraphError::UnknownVertex(name.to_string()))?.cardinality = cardinality;
        Ok(MixedGraph::assemble(vertices, self.edges.clone(), self.fixed.clone()))
    }

    /// Returns a copy with `extra` edges added.
    pub fn with_edges<I: IntoIterator<Item = Edge>>(&self, extra: I) -> Result<MixedGraph> {
        MixedGraph::new(
            self.vertices.values().cloned(),
            self.edges.iter().cloned().chain(extra),
            self.fixed.iter().cloned(),
        )
    }

    /// Returns a copy without the listed edges (absent edges are ignored).
    pub fn without_edges<'a, I: IntoIterator<Item = &'a Edge>>(&self, drop: I) -> MixedGraph {
        let mut edges = self.edges.clone();
        for e in drop {
            edges.remove(&Edge::new(e.tail.clone(), e.head.clone(), e.kind));
        }
        MixedGraph::assemble(self.vertices.clone(), edges, self.fixed.clone())
    }

    /// Returns a copy with an extra vertex.
    pub fn with_vertex(&self, v: VertexInfo) -> Result<MixedGraph> {
        MixedGraph::new(
            self.vertices.values().cloned().chain(std::iter::once(v)),
            self.edges.iter().cloned(),
            self.fixed.iter().cloned(),
        )
    }

    /// All vertex names.
    pub fn names(&self) -> VSet {
        self.vertices.keys().cloned().collect()
    }

    /// Iterates vertex records in name order.
    pub fn vertices(&self) -> impl Iterator<Item = &VertexInfo> {
        self.vertices.values()
    }

    /// Looks up a vertex record.
    pub fn vertex(&self, name: &str) -> Option<&VertexInfo> {
        self.vertices.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vertices.contains_key(name)
    }

    /// Cardinality of a vertex.
    pub fn cardinality(&self, name: &str) -> Result<usize> {
        self.vertices.get(name).map(|v| v.cardinality).ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    /// Iterates edges in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    /// Edges of one kind.
    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, e: &Edge) -> bool {
        self.edges.contains(&Edge::new(e.tail.clone(), e.head.clone(), e.kind))
    }

    pub fn has_directed(&self, tail: &str, head: &str) -> bool {
        self.edges.contains(&Edge::directed(tail, head))
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&Edge::bidirected(a, b))
    }

    pub fn has_undirected(&self, a: &str, b: &str) -> bool {
        self.edges.contains(&Edge::undirected(a, b))
    }

    /// Fixed (context) vertices.
    pub fn fixed(&self) -> &VSet {
        &self.fixed
    }

    pub fn is_fixed(&self, v: &str) -> bool {
        self.fixed.contains(v)
    }

    /// True if a fixed set is present.
    pub fn has_context(&self) -> bool {
        !self.fixed.is_empty()
    }

    /// Random (non-fixed) vertices, latent ones included.
    pub fn random(&self) -> VSet {
        self.vertices.keys().filter(|v| !self.fixed.contains(*v)).cloned().collect()
    }

    /// Observed (non-latent) vertices.
    pub fn observed(&self) -> VSet {
        self.vertices.values().filter(|v| !v.latent).map(|v| v.name.clone()).collect()
    }

    /// Latent vertices.
    pub fn latents(&self) -> VSet {
        self.vertices.values().filter(|v| v.latent).map(|v| v.name.clone()).collect()
    }

    fn adjacency(&self, v: &str) -> Result<&Adjacency> {
        self.adj.get(v).ok_or_else(|| GraphError::UnknownVertex(v.to_string()))
    }

    /// Parents of a single vertex.
    pub fn pa(&self, v: &str) -> Result<&VSet> {
        Ok(&self.adjacency(v)?.parents)
    }

    /// Children of a single vertex.
    pub fn ch(&self, v: &str) -> Result<&VSet> {
        Ok(&self.adjacency(v)?.children)
    }

    /// Bidirected neighbours of a single vertex.
    pub fn sib(&self, v: &str) -> Result<&VSet> {
        Ok(&self.adjacency(v)?.siblings)
    }

    /// Undirected neighbours of a single vertex.
    pub fn nb(&self, v: &str) -> Result<&VSet> {
        Ok(&self.adjacency(v)?.neighbors)
    }

    /// Checks that every name exists.
    pub fn check_names<'a, I: IntoIterator<Item = &'a String>>(&self, names: I) -> Result<()> {
        for n in names {
            if !self.vertices.contains_key(n) {
                return Err(GraphError::UnknownVertex(n.clone()));
            }
        }
        Ok(())
    }

    /// The subgraph on `s`, keeping every edge with both endpoints in `s`.
    pub fn induced_subgraph(&self, s: &VSet) -> Result<MixedGraph> {
        self.check_names(s)?;
        let vertices = self.vertices.iter().filter(|(k, _)| s.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect();
        let edges = self.edges.iter().filter(|e| s.contains(&e.tail) && s.contains(&e.head)).cloned().collect();
        let fixed = self.fixed.intersection(s).cloned().collect();
        Ok(MixedGraph::assemble(vertices, edges, fixed))
    }

    /// Fixes `v`: removes directed and bidirected edges into `v` and moves it
    /// to the fixed set.
    pub fn fix(&self, v: &str) -> Result<MixedGraph> {
        if !self.contains(v) {
            return Err(GraphError::UnknownVertex(v.to_string()));
        }
        if self.fixed.contains(v) {
            return Err(GraphError::NotRandom(v.to_string()));
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| match e.kind {
                EdgeKind::Directed => e.head != v,
                EdgeKind::Bidirected => !e.touches(v),
                EdgeKind::Undirected => true,
            })
            .cloned()
            .collect();
        let mut fixed = self.fixed.clone();
        fixed.insert(v.to_string());
        let g = MixedGraph::assemble(self.vertices.clone(), edges, fixed);
        if let Some(e) = g.edges.iter().find(|e| e.kind == EdgeKind::Undirected && e.touches(v)) {
            return Err(GraphError::EdgeIntoFixed(e.clone()));
        }
        Ok(g)
    }

    /// Compact one-line description, e.g. `A->B, B<->C | fixed: W`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self.edges.iter().map(|e| e.to_string()).collect();
        let touched: VSet = self.edges.iter().flat_map(|e| [e.tail.clone(), e.head.clone()]).collect();
        parts.extend(self.vertices.keys().filter(|v| !touched.contains(*v)).cloned());
        let mut s = parts.join(", ");
        if !self.fixed.is_empty() {
            s.push_str(" | fixed: ");
            s.push_str(&self.fixed.iter().cloned().collect::<Vec<_>>().join(", "));
        }
        s
    }
}

impl fmt::Display for MixedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_builds_all_edge_kinds() {
        let g = MixedGraph::parse("A->B, B<->C, C--D, E").unwrap();
        assert_eq!(g.names(), vset(["A", "B", "C", "D", "E"]));
        assert!(g.has_directed("A", "B"));
        assert!(g.has_bidirected("C", "B"));
        assert!(g.has_undirected("D", "C"));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn parallel_edges_of_different_kinds_coexist() {
        let g = MixedGraph::parse("A->Y, A<->Y").unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(MixedGraph::parse("A->A").unwrap_err(), GraphError::SelfLoop("A".into()));
    }

    #[test]
    fn unknown_endpoint_rejected() {
        let err = MixedGraph::new([VertexInfo::observed("A")], [Edge::directed("A", "B")], Vec::<String>::new());
        assert_eq!(err.unwrap_err(), GraphError::UnknownVertex("B".into()));
    }

    #[test]
    fn edge_into_fixed_rejected() {
        let g = MixedGraph::parse("A->B").unwrap();
        assert!(matches!(g.with_fixed(["B"]), Err(GraphError::EdgeIntoFixed(_))));
        assert!(g.with_fixed(["A"]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let g = MixedGraph::parse("A->B, B<->C, C--D").unwrap().with_latent(["D"]).unwrap();
        let back = MixedGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn json_defaults_fill_latent_and_cardinality() {
        let g = MixedGraph::from_json(r#"{"vertices":[{"name":"A"},{"name":"B","cardinality":3}],"edges":[{"tail":"A","head":"B","kind":"directed"}]}"#).unwrap();
        assert_eq!(g.cardinality("A").unwrap(), 2);
        assert_eq!(g.cardinality("B").unwrap(), 3);
        assert!(g.latents().is_empty());
    }

    #[test]
    fn fix_removes_incoming_directed_and_bidirected() {
        let g = MixedGraph::parse("A->M, M->Y, A<->Y").unwrap();
        let f = g.fix("Y").unwrap();
        assert!(!f.has_directed("M", "Y"));
        assert!(!f.has_bidirected("A", "Y"));
        assert!(f.has_directed("A", "M"));
        assert!(f.is_fixed("Y"));
    }

    #[test]
    fn induced_subgraph_identity_and_empty() {
        let g = MixedGraph::parse("A->B, B<->C").unwrap();
        assert_eq!(g.induced_subgraph(&g.names()).unwrap(), g);
        assert_eq!(g.induced_subgraph(&VSet::new()).unwrap(), MixedGraph::empty());
    }
}
