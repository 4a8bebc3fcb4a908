//! Policy-set constructors for common edge edits.
//!
//! Each helper returns a policy set whose post-intervention graph shows the
//! named edit. New policies use the parametric mechanism `f`.

use crate::{InterventionError, Mechanism, Policy, PolicySet, Result};
use sgpid_graph::{MixedGraph, VSet};

/// Parents and block neighbours of `v`.
fn equation_inputs(g: &MixedGraph, v: &str) -> Result<VSet> {
    Ok(g.pa(v)?.union(g.nb(v)?).cloned().collect())
}

/// Makes `cause` a direct cause of `target`, keeping the target's other
/// inputs.
pub fn induce_direct_cause(g: &MixedGraph, target: &str, cause: &str) -> Result<PolicySet> {
    let mut inputs = equation_inputs(g, target)?;
    g.check_names([&cause.to_string()])?;
    if cause == target {
        return Err(InterventionError::SelfInput(target.to_string()));
    }
    inputs.insert(cause.to_string());
    PolicySet::new(vec![Policy::param(target, inputs, "f")])
}

/// Replaces the equation of a block member by a new function of the same
/// inputs, leaving the graph unchanged.
pub fn modify_block_equation(g: &MixedGraph, target: &str) -> Result<PolicySet> {
    PolicySet::new(vec![Policy::param(target, equation_inputs(g, target)?, "f")])
}

/// Adds `a -- b` by making each endpoint's policy depend on the other. Both
/// endpoints must already carry a policy in `ps`.
pub fn add_undirected_edge(g: &MixedGraph, ps: &PolicySet, a: &str, b: &str) -> Result<PolicySet> {
    g.check_names([&a.to_string(), &b.to_string()])?;
    let mut out = ps.clone();
    for (x, y) in [(a, b), (b, a)] {
        let p = ps.get(x).ok_or_else(|| InterventionError::MissingEndpointPolicy(x.to_string()))?;
        if matches!(p.mechanism, Mechanism::Cpt { .. }) {
            return Err(InterventionError::SignatureChange(x.to_string()));
        }
        let mut q = p.clone();
        q.inputs.insert(y.to_string());
        out = out.with(q);
    }
    Ok(out)
}

fn require_undirected(g: &MixedGraph, x: &str, y: &str) -> Result<()> {
    g.check_names([&x.to_string(), &y.to_string()])?;
    if !g.has_undirected(x, y) {
        return Err(InterventionError::NotUndirected(x.to_string(), y.to_string()));
    }
    Ok(())
}

/// Turns `x -- y` into a directed edge pointing at `survivor`, whose
/// dependence on the other endpoint is kept.
pub fn partial_removal(g: &MixedGraph, edge: (&str, &str), survivor: &str) -> Result<PolicySet> {
    let (x, y) = edge;
    require_undirected(g, x, y)?;
    let other = if survivor == x {
        y
    } else if survivor == y {
        x
    } else {
        return Err(InterventionError::NotEndpoint(survivor.to_string()));
    };
    let mut inputs = equation_inputs(g, other)?;
    inputs.remove(survivor);
    PolicySet::new(vec![Policy::param(other, inputs, "f")])
}

/// Removes `x -- y` entirely by intervening on both endpoints.
pub fn complete_removal(g: &MixedGraph, edge: (&str, &str)) -> Result<PolicySet> {
    let (x, y) = edge;
    require_undirected(g, x, y)?;
    let mut policies = Vec::new();
    for (v, w) in [(x, y), (y, x)] {
        let mut inputs = equation_inputs(g, v)?;
        inputs.remove(w);
        policies.push(Policy::param(v, inputs, "f"));
    }
    PolicySet::new(policies)
}
