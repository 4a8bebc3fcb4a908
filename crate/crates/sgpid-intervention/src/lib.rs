//! Policy interventions on segregated graphs.
//!
//! A [`Policy`] replaces the structural equation of a target vertex by a
//! mechanism of its inputs `Z_A`. A [`PolicySet`] bundles policies with
//! distinct targets. [`procedure`] holds the induced-dependence relation,
//! the segregation-preservation check and the post-intervention graph
//! construction; [`taxonomy`] builds policy sets for common edge edits.

pub mod procedure;
pub mod random;
pub mod taxonomy;

pub use procedure::{
    check_segregation_preserving, dependency_digraph, induced_dependence, intervene_graph, intervene_graph_unchecked,
    is_segregation_preserving, SegregationCheck, Violation,
};

use serde::{Deserialize, Serialize};
use sgpid_graph::{GraphError, MixedGraph, VSet};
use std::path::Path;

/// Errors raised while building, loading or applying policies.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterventionError {
    #[error("duplicate policy target {0}")]
    DuplicateTarget(String),
    #[error("policy target {0} is also one of its own inputs")]
    SelfInput(String),
    #[error("policy on {0} refers to a latent vertex {1}")]
    LatentReference(String, String),
    #[error("policy target {0} is a fixed vertex")]
    FixedTarget(String),
    #[error("policy on {target}: {reason}")]
    BadTable { target: String, reason: String },
    #[error("policy on {0} has a table mechanism whose inputs cannot change")]
    SignatureChange(String),
    #[error("adding an undirected edge needs policies on both endpoints; {0} has none")]
    MissingEndpointPolicy(String),
    #[error("no undirected edge {0}--{1}")]
    NotUndirected(String, String),
    #[error("{0} is not an endpoint of the edge")]
    NotEndpoint(String),
    #[error("outcome and targets overlap at {0}")]
    OutcomeIsTarget(String),
    #[error("policy set is not segregation preserving: {0}")]
    NotSegregationPreserving(Violation),
    #[error("malformed policy file: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, InterventionError>;

/// Nested-array probability table. The outer levels index the input states
/// (inputs in lexicographic order), the innermost level is the distribution
/// of the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NestedTable {
    Leaf(f64),
    Nest(Vec<NestedTable>),
}

impl NestedTable {
    /// Builds a nested table from a flat row-major table and its shape.
    pub fn from_flat(flat: &[f64], shape: &[usize]) -> NestedTable {
        match shape.split_first() {
            None => NestedTable::Leaf(flat[0]),
            Some((&n, rest)) => {
                let stride: usize = rest.iter().product();
                NestedTable::Nest((0..n).map(|i| NestedTable::from_flat(&flat[i * stride..(i + 1) * stride], rest)).collect())
            }
        }
    }

    /// Flattens in row-major order, checking the shape.
    pub fn flatten(&self, shape: &[usize]) -> std::result::Result<Vec<f64>, String> {
        let mut out = Vec::with_capacity(shape.iter().product());
        self.flatten_into(shape, 0, &mut out)?;
        Ok(out)
    }

    fn flatten_into(&self, shape: &[usize], depth: usize, out: &mut Vec<f64>) -> std::result::Result<(), String> {
        match (self, shape.split_first()) {
            (NestedTable::Leaf(x), None) => {
                out.push(*x);
                Ok(())
            }
            (NestedTable::Nest(items), Some((&n, rest))) if items.len() == n => {
                items.iter().try_for_each(|t| t.flatten_into(rest, depth + 1, out))
            }
            (NestedTable::Nest(items), Some((&n, _))) => {
                Err(format!("level {depth} has {} entries, expected {n}", items.len()))
            }
            (NestedTable::Leaf(_), Some(_)) => Err(format!("table too shallow at level {depth}")),
            (NestedTable::Nest(_), None) => Err(format!("table too deep at level {depth}")),
        }
    }
}

/// How a policy produces its target value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Mechanism {
    /// Conditional probability table over the inputs.
    Cpt { table: NestedTable },
    /// A named deterministic function of the inputs, resolved elsewhere.
    Param { name: String },
    /// A constant state (a node intervention).
    Const { value: usize },
}

/// A single policy `f_A(Z_A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub target: String,
    #[serde(default)]
    pub inputs: VSet,
    pub mechanism: Mechanism,
}

impl Policy {
    /// A node intervention `A := value`.
    pub fn constant(target: impl Into<String>, value: usize) -> Policy {
        Policy { target: target.into(), inputs: VSet::new(), mechanism: Mechanism::Const { value } }
    }

    /// A parametric policy with a named mechanism.
    pub fn param(target: impl Into<String>, inputs: VSet, name: impl Into<String>) -> Policy {
        Policy { target: target.into(), inputs, mechanism: Mechanism::Param { name: name.into() } }
    }

    /// A table policy from a flat row-major table over (sorted inputs, target).
    pub fn cpt(g: &MixedGraph, target: impl Into<String>, inputs: VSet, flat: &[f64]) -> Result<Policy> {
        let target = target.into();
        let shape = table_shape(g, &target, &inputs)?;
        if flat.len() != shape.iter().product::<usize>() {
            return Err(InterventionError::BadTable {
                target,
                reason: format!("flat table has {} entries, expected {}", flat.len(), shape.iter().product::<usize>()),
            });
        }
        let table = NestedTable::from_flat(flat, &shape);
        Ok(Policy { target, inputs, mechanism: Mechanism::Cpt { table } })
    }

    /// True for constants, named structural functions, and tables whose rows
    /// are point masses.
    pub fn is_deterministic(&self) -> bool {
        match &self.mechanism {
            Mechanism::Const { .. } | Mechanism::Param { .. } => true,
            Mechanism::Cpt { table } => {
                fn leaves(t: &NestedTable, out: &mut Vec<f64>) {
                    match t {
                        NestedTable::Leaf(x) => out.push(*x),
                        NestedTable::Nest(v) => v.iter().for_each(|t| leaves(t, out)),
                    }
                }
                let mut xs = Vec::new();
                leaves(table, &mut xs);
                xs.iter().all(|x| *x == 0.0 || *x == 1.0)
            }
        }
    }

    /// The flat row-major table over (sorted inputs, target), or `None` for
    /// parametric mechanisms. Constants yield point-mass rows.
    pub fn flat_table(&self, g: &MixedGraph) -> Result<Option<Vec<f64>>> {
        let shape = table_shape(g, &self.target, &self.inputs)?;
        let card = *shape.last().expect("shape has a target level");
        let rows: usize = shape[..shape.len() - 1].iter().product();
        let bad = |reason: String| InterventionError::BadTable { target: self.target.clone(), reason };
        match &self.mechanism {
            Mechanism::Param { .. } => Ok(None),
            Mechanism::Const { value } => {
                if *value >= card {
                    return Err(bad(format!("constant {value} outside 0..{card}")));
                }
                let mut t = vec![0.0; rows * card];
                for r in 0..rows {
                    t[r * card + value] = 1.0;
                }
                Ok(Some(t))
            }
            Mechanism::Cpt { table } => {
                let flat = table.flatten(&shape).map_err(bad)?;
                for (r, row) in flat.chunks(card).enumerate() {
                    if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                        return Err(bad(format!("row {r} has a negative or non-finite entry")));
                    }
                    let s: f64 = row.iter().sum();
                    if (s - 1.0).abs() > 1e-9 {
                        return Err(bad(format!("row {r} sums to {s}")));
                    }
                }
                Ok(Some(flat))
            }
        }
    }
}

/// Table shape: cardinalities of the sorted inputs followed by the target's.
fn table_shape(g: &MixedGraph, target: &str, inputs: &VSet) -> Result<Vec<usize>> {
    let mut shape = Vec::with_capacity(inputs.len() + 1);
    for z in inputs {
        shape.push(g.cardinality(z)?);
    }
    shape.push(g.cardinality(target)?);
    Ok(shape)
}

/// A set of policies with distinct targets.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Policy>", into = "Vec<Policy>")]
pub struct PolicySet {
    policies: Vec<Policy>,
}

impl TryFrom<Vec<Policy>> for PolicySet {
    type Error = InterventionError;
    fn try_from(policies: Vec<Policy>) -> Result<PolicySet> {
        PolicySet::new(policies)
    }
}

impl From<PolicySet> for Vec<Policy> {
    fn from(ps: PolicySet) -> Vec<Policy> {
        ps.policies
    }
}

impl PolicySet {
    /// Builds a set, sorting by target and rejecting duplicates.
    pub fn new(mut policies: Vec<Policy>) -> Result<PolicySet> {
        policies.sort_by(|a, b| a.target.cmp(&b.target));
        for w in policies.windows(2) {
            if w[0].target == w[1].target {
                return Err(InterventionError::DuplicateTarget(w[0].target.clone()));
            }
        }
        Ok(PolicySet { policies })
    }

    /// The empty set.
    pub fn empty() -> PolicySet {
        PolicySet::default()
    }

    /// Node interventions `A := a` for every assignment.
    pub fn node<I, S>(assignments: I) -> Result<PolicySet>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        PolicySet::new(assignments.into_iter().map(|(a, v)| Policy::constant(a, v)).collect())
    }

    pub fn from_json(text: &str) -> Result<PolicySet> {
        serde_json::from_str(text).map_err(|e| InterventionError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy sets serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PolicySet> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| InterventionError::Io(format!("{}: {e}", path.as_ref().display())))?;
        PolicySet::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json())
            .map_err(|e| InterventionError::Io(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }

    pub fn iter(&self) -> impl Iterator<Item = &Policy> {
        self.policies.iter()
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    /// The intervened vertex set `A`.
    pub fn targets(&self) -> VSet {
        self.policies.iter().map(|p| p.target.clone()).collect()
    }

    pub fn get(&self, target: &str) -> Option<&Policy> {
        self.policies.iter().find(|p| p.target == target)
    }

    /// True when every policy is deterministic.
    pub fn is_deterministic(&self) -> bool {
        self.policies.iter().all(Policy::is_deterministic)
    }

    /// True when every policy is a constant.
    pub fn is_node_intervention(&self) -> bool {
        self.policies.iter().all(|p| matches!(p.mechanism, Mechanism::Const { .. }))
    }

    /// A copy with `p` inserted, replacing any policy on the same target.
    pub fn with(&self, p: Policy) -> PolicySet {
        let mut policies: Vec<Policy> = self.policies.iter().filter(|q| q.target != p.target).cloned().collect();
        policies.push(p);
        PolicySet::new(policies).expect("targets distinct")
    }

    /// Checks names, latent and fixed references, self inputs and tables.
    pub fn validate(&self, g: &MixedGraph) -> Result<()> {
        for p in &self.policies {
            g.check_names(std::iter::once(&p.target).chain(&p.inputs))?;
            if p.inputs.contains(&p.target) {
                return Err(InterventionError::SelfInput(p.target.clone()));
            }
            if g.is_fixed(&p.target) {
                return Err(InterventionError::FixedTarget(p.target.clone()));
            }
            let latents = g.latents();
            if let Some(h) = std::iter::once(&p.target).chain(&p.inputs).find(|v| latents.contains(*v)) {
                return Err(InterventionError::LatentReference(p.target.clone(), h.clone()));
            }
            p.flat_table(g)?;
        }
        Ok(())
    }
}
