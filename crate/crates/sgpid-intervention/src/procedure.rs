//! Induced dependence, segregation preservation and the post-intervention
//! graph.

use crate::{InterventionError, PolicySet, Result};
use serde::Serialize;
use sgpid_graph::{Edge, EdgeKind, MixedGraph, VSet};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Why a policy set fails the segregation-preservation check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// An input of `target` lies in its strict exterior.
    StrictExterior { target: String, input: String },
    /// `a` and `b` depend on each other but `b` is not an input of `a`.
    MutualDependence { a: String, b: String },
    /// The constructed graph is not segregated or has a partially directed cycle.
    ResultNotSg(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StrictExterior { target, input } => {
                write!(f, "clause (a): input {input} of {target} is in the strict exterior of {target}")
            }
            Violation::MutualDependence { a, b } => {
                write!(f, "clause (b): {a} and {b} depend on each other but {b} is not an input of {a}")
            }
            Violation::ResultNotSg(why) => write!(f, "post-intervention graph is not segregated: {why}"),
        }
    }
}

/// Outcome of [`is_segregation_preserving`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegregationCheck {
    pub preserving: bool,
    pub violation: Option<Violation>,
}

/// Inputs of every vertex's post-intervention structural equation: `Z_A`
/// for targets, parents and block neighbours for every other vertex.
pub fn dependency_digraph(ps: &PolicySet, g: &MixedGraph) -> Result<BTreeMap<String, VSet>> {
    g.check_names(&ps.targets())?;
    let mut out = BTreeMap::new();
    for v in g.names() {
        let inputs = match ps.get(&v) {
            Some(p) => p.inputs.clone(),
            None => g.pa(&v)?.union(g.nb(&v)?).cloned().collect(),
        };
        out.insert(v, inputs);
    }
    Ok(out)
}

/// The relation `A_i △ A_j` over distinct targets, returned as pairs
/// `(A_i, A_j)`: `A_i` is made a function of `A_j`, directly or through a
/// chain of post-intervention structural equations.
pub fn induced_dependence(ps: &PolicySet, g: &MixedGraph) -> Result<BTreeSet<(String, String)>> {
    let deps = dependency_digraph(ps, g)?;
    let targets = ps.targets();
    let mut out = BTreeSet::new();
    for a in &targets {
        // Everything `a` depends on, following inputs backwards.
        let mut seen = VSet::new();
        let mut stack: Vec<&String> = deps[a].iter().collect();
        while let Some(v) = stack.pop() {
            if seen.insert(v.clone()) {
                stack.extend(deps[v].iter());
            }
        }
        for b in targets.iter().filter(|b| *b != a && seen.contains(*b)) {
            out.insert((a.clone(), b.clone()));
        }
    }
    Ok(out)
}

/// Checks both clauses of segregation preservation, then confirms that the
/// constructed graph is a segregated graph.
pub fn check_segregation_preserving(ps: &PolicySet, g: &MixedGraph) -> Result<std::result::Result<(), Violation>> {
    ps.validate(g)?;
    for p in ps.iter() {
        let sext = g.strict_exterior(&VSet::from([p.target.clone()]));
        if let Some(z) = p.inputs.iter().find(|z| sext.contains(*z)) {
            return Ok(Err(Violation::StrictExterior { target: p.target.clone(), input: z.clone() }));
        }
    }
    let rel = induced_dependence(ps, g)?;
    for (a, b) in &rel {
        if rel.contains(&(b.clone(), a.clone())) {
            for (x, y) in [(a, b), (b, a)] {
                if !ps.get(x).expect("target").inputs.contains(y) {
                    return Ok(Err(Violation::MutualDependence { a: x.clone(), b: y.clone() }));
                }
            }
        }
    }
    let out = intervene_graph_unchecked(g, ps)?;
    let report = out.classify();
    if !report.segregated {
        return Ok(Err(Violation::ResultNotSg("a vertex has both undirected and bidirected edges".into())));
    }
    if let Some(cycle) = out.partially_directed_cycle() {
        return Ok(Err(Violation::ResultNotSg(format!("partially directed cycle through {}", cycle.join(", ")))));
    }
    Ok(Ok(()))
}

/// Boolean form of [`check_segregation_preserving`] with the witness.
pub fn is_segregation_preserving(ps: &PolicySet, g: &MixedGraph) -> Result<SegregationCheck> {
    Ok(match check_segregation_preserving(ps, g)? {
        Ok(()) => SegregationCheck { preserving: true, violation: None },
        Err(v) => SegregationCheck { preserving: false, violation: Some(v) },
    })
}

/// Builds `G_fA` after checking that `ps` is segregation preserving.
pub fn intervene_graph(g: &MixedGraph, ps: &PolicySet) -> Result<MixedGraph> {
    check_segregation_preserving(ps, g)?.map_err(InterventionError::NotSegregationPreserving)?;
    intervene_graph_unchecked(g, ps)
}

/// Builds `G_fA` without validation: undirected edges at a target are
/// oriented out of it (and dropped when both ends are targets), edges into
/// targets are removed, `Z_A -> A` edges are added, and finally every pair
/// of opposite directed edges becomes one undirected edge.
pub fn intervene_graph_unchecked(g: &MixedGraph, ps: &PolicySet) -> Result<MixedGraph> {
    let targets = ps.targets();
    g.check_names(&targets)?;
    let mut edges: BTreeSet<Edge> = BTreeSet::new();
    for e in g.edges() {
        let (ta, tb) = (targets.contains(&e.tail), targets.contains(&e.head));
        match e.kind {
            EdgeKind::Directed if !tb => {
                edges.insert(e.clone());
            }
            EdgeKind::Bidirected if !ta && !tb => {
                edges.insert(e.clone());
            }
            EdgeKind::Undirected => match (ta, tb) {
                (false, false) => {
                    edges.insert(e.clone());
                }
                (true, false) => {
                    edges.insert(Edge::directed(e.tail.clone(), e.head.clone()));
                }
                (false, true) => {
                    edges.insert(Edge::directed(e.head.clone(), e.tail.clone()));
                }
                (true, true) => {}
            },
            _ => {}
        }
    }
    for p in ps.iter() {
        for z in &p.inputs {
            edges.insert(Edge::directed(z.clone(), p.target.clone()));
        }
    }
    let mutual: Vec<Edge> = edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Directed && e.tail < e.head)
        .filter(|e| edges.contains(&Edge::directed(e.head.clone(), e.tail.clone())))
        .cloned()
        .collect();
    for e in mutual {
        edges.remove(&Edge::directed(e.head.clone(), e.tail.clone()));
        edges.remove(&e);
        edges.insert(Edge::undirected(e.tail, e.head));
    }
    Ok(MixedGraph::new(g.vertices().cloned(), edges, g.fixed().clone())?)
}
