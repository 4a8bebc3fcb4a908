//! Unit networks and their segregated-graph instantiation.

use crate::{ExperimentError, Result};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sgpid_graph::{Edge, EdgeKind, MixedGraph, VertexInfo};
use std::collections::BTreeSet;

/// Random network families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    ErdosRenyi,
    WattsStrogatz,
    BarabasiAlbert,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 3] =
        [GeneratorKind::ErdosRenyi, GeneratorKind::WattsStrogatz, GeneratorKind::BarabasiAlbert];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::ErdosRenyi => "erdos-renyi",
            GeneratorKind::WattsStrogatz => "watts-strogatz",
            GeneratorKind::BarabasiAlbert => "barabasi-albert",
        }
    }

    /// Generator parameters whose expected mean degree is about
    /// `density * (n - 1)`. WS rounds the degree to an even number in
    /// `[2, n - 2]`, BA uses `m = round(degree / 2)` in `[1, n - 1]`.
    pub fn at_density(self, density: f64, n: usize, rewiring: f64) -> Generator {
        let degree = density * (n.saturating_sub(1)) as f64;
        match self {
            GeneratorKind::ErdosRenyi => Generator::ErdosRenyi { p: density },
            GeneratorKind::WattsStrogatz => {
                let upper = n.saturating_sub(2).max(2);
                let k = (2.0 * (degree / 2.0).round()) as usize;
                Generator::WattsStrogatz { k: k.clamp(2, upper - upper % 2), beta: rewiring }
            }
            GeneratorKind::BarabasiAlbert => {
                let m = (degree / 2.0).round() as usize;
                Generator::BarabasiAlbert { m: m.clamp(1, n.saturating_sub(1).max(1)) }
            }
        }
    }
}

/// A fully parameterized generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    ErdosRenyi { p: f64 },
    WattsStrogatz { k: usize, beta: f64 },
    BarabasiAlbert { m: usize },
}

/// What to generate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub generator: Generator,
    pub n_units: usize,
    pub seed: u64,
}

/// A simple undirected graph on units `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    pub n_units: usize,
    /// Edges `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Sorted neighbour lists.
    pub neighbors: Vec<Vec<usize>>,
}

impl Network {
    pub fn from_edges(n_units: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Network> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j || i >= n_units || j >= n_units {
                return Err(ExperimentError::InvalidParameter(format!("bad unit edge ({i}, {j})")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        let mut neighbors = vec![Vec::new(); n_units];
        for &(i, j) in &set {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        neighbors.iter_mut().for_each(|l| l.sort_unstable());
        Ok(Network { n_units, edges: set.into_iter().collect(), neighbors })
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// The segregated graph of one network replicate: per unit C -> A -> Y,
    /// C -> Y and C <-> A; across neighbours C -> A, A -> Y, C -> Y and Y -- Y.
    pub fn segregated_graph(&self) -> Result<MixedGraph> {
        let (c, a, y) = (|i| format!("C{i}"), |i| format!("A{i}"), |i| format!("Y{i}"));
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for i in 0..self.n_units {
            vertices.extend([VertexInfo::observed(c(i)), VertexInfo::observed(a(i)), VertexInfo::observed(y(i))]);
            edges.push(Edge::new(c(i), a(i), EdgeKind::Directed));
            edges.push(Edge::new(a(i), y(i), EdgeKind::Directed));
            edges.push(Edge::new(c(i), y(i), EdgeKind::Directed));
            edges.push(Edge::new(c(i), a(i), EdgeKind::Bidirected));
        }
        for &(i, j) in &self.edges {
            for (s, t) in [(i, j), (j, i)] {
                edges.push(Edge::new(c(s), a(t), EdgeKind::Directed));
                edges.push(Edge::new(a(s), y(t), EdgeKind::Directed));
                edges.push(Edge::new(c(s), y(t), EdgeKind::Directed));
            }
            edges.push(Edge::new(y(i), y(j), EdgeKind::Undirected));
        }
        Ok(MixedGraph::new(vertices, edges, Vec::<String>::new())?)
    }
}

/// Draw the unit network and instantiate its segregated graph.
pub fn generate_network(spec: &NetworkSpec) -> Result<(Network, MixedGraph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let net = match spec.generator {
        Generator::ErdosRenyi { p } => erdos_renyi(&mut rng, spec.n_units, p)?,
        Generator::WattsStrogatz { k, beta } => watts_strogatz(&mut rng, spec.n_units, k, beta)?,
        Generator::BarabasiAlbert { m } => barabasi_albert(&mut rng, spec.n_units, m)?,
    };
    let g = net.segregated_graph()?;
    Ok((net, g))
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ExperimentError::InvalidParameter(format!("{name} = {p} is not in [0, 1]")))
    }
}

/// G(n, p): each pair independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Result<Network> {
    check_probability("p", p)?;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Network::from_edges(n, edges)
}

/// Ring lattice with `k` nearest neighbours (`k / 2` per side), each
/// lattice edge rewired with probability `beta` to a uniform new endpoint.
pub fn watts_strogatz<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, beta: f64) -> Result<Network> {
    check_probability("beta", beta)?;
    if k >= n {
        return Err(ExperimentError::InvalidParameter(format!("watts-strogatz needs k < n, got k = {k}, n = {n}")));
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !rng.random_bool(beta) || adj[u].len() >= n - 1 || !adj[u].contains(&v) {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|u| adj[u].iter().filter(move |&&v| u < v).map(move |&v| (u, v)).collect::<Vec<_>>()).collect();
    Network::from_edges(n, edges)
}

/// Preferential attachment: units `0..m` start unconnected, each later unit
/// attaches to `m` distinct earlier units drawn proportionally to degree.
/// The result has `(n - m) * m` edges.
pub fn barabasi_albert<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<Network> {
    if m == 0 || m >= n {
        return Err(ExperimentError::InvalidParameter(format!("barabasi-albert needs 1 <= m < n, got m = {m}, n = {n}")));
    }
    let mut edges = Vec::new();
    let mut targets: Vec<usize> = (0..m).collect();
    let mut repeated: Vec<usize> = Vec::new();
    for source in m..n {
        edges.extend(targets.iter().map(|&t| (t, source)));
        repeated.extend(targets.iter().copied());
        repeated.extend(std::iter::repeat_n(source, m));
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            chosen.insert(*repeated.choose(rng).expect("nonempty"));
        }
        targets = chosen.into_iter().collect();
    }
    Network::from_edges(n, edges)
}
