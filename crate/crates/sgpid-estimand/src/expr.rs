//! Expression trees for kernels and estimands.

use serde::Serialize;
use sgpid_graph::{MixedGraph, VSet};
use sgpid_intervention::Policy;
use std::collections::BTreeMap;

/// What a substituted variable is replaced by.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assignment {
    /// The variable is held at a symbolic value `a`, left as a free argument.
    Symbolic,
    /// The variable is held at a concrete state.
    Value { value: usize },
    /// The variable is replaced by a deterministic policy of its inputs.
    Policy { policy: Policy },
}

impl Assignment {
    /// Variables introduced by the replacement.
    pub fn inputs(&self) -> VSet {
        match self {
            Assignment::Policy { policy } => policy.inputs.clone(),
            _ => VSet::new(),
        }
    }
}

/// How one member of an equilibrium block is generated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockMechanism {
    /// A policy replaces the member's equation.
    Policy { policy: Policy },
    /// The member keeps its observational conditional `p(V | given)`.
    Observed { given: VSet },
}

/// A symbolic kernel or estimand. Every node denotes a nonnegative table over
/// its free variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Expr {
    /// The observed marginal `p(vars)`.
    ObservedJoint { vars: VSet },
    /// The child divided by its own marginal over `given`.
    Conditional { child: Box<Expr>, given: VSet },
    /// The child summed over every free variable outside `keep`.
    Marginal { child: Box<Expr>, keep: VSet },
    /// Pointwise product; the empty product is the constant 1.
    Product { factors: Vec<Expr> },
    /// The child summed over `vars`.
    SumOver { vars: VSet, child: Box<Expr> },
    /// The fixing operation on `vertex`, valid in the recorded graph.
    Fix {
        child: Box<Expr>,
        vertex: String,
        graph: MixedGraph,
    },
    /// The child with variables replaced per `assignments`.
    Substitute {
        child: Box<Expr>,
        assignments: BTreeMap<String, Assignment>,
    },
    /// A stochastic policy used as a density factor `f_A(A | Z_A)`.
    PolicyFactor { policy: Policy },
    /// The post-intervention block equilibrium `p*(block | given)`.
    BlockEquilibrium {
        block: VSet,
        given: VSet,
        mechanisms: BTreeMap<String, BlockMechanism>,
    },
}

impl Expr {
    /// The observed conditional `p(heads | given)`; `p(heads)` when `given` is empty.
    pub fn prob(heads: VSet, given: VSet) -> Expr {
        if given.is_empty() {
            return Expr::ObservedJoint { vars: heads };
        }
        let vars = heads.union(&given).cloned().collect();
        Expr::Conditional {
            child: Box::new(Expr::ObservedJoint { vars }),
            given,
        }
    }

    /// Heads and conditioning set when the node is an observed conditional.
    pub fn as_prob(&self) -> Option<(VSet, VSet)> {
        match self {
            Expr::ObservedJoint { vars } => Some((vars.clone(), VSet::new())),
            Expr::Conditional { child, given } => match child.as_ref() {
                Expr::ObservedJoint { vars } if given.is_subset(vars) => {
                    Some((vars.difference(given).cloned().collect(), given.clone()))
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// A product, collapsing the single-factor case.
    pub fn product(mut factors: Vec<Expr>) -> Expr {
        if factors.len() == 1 {
            return factors.pop().expect("one factor");
        }
        Expr::Product { factors }
    }

    /// A sum, collapsing the empty-variable case.
    pub fn sum(vars: VSet, child: Expr) -> Expr {
        if vars.is_empty() {
            return child;
        }
        Expr::SumOver {
            vars,
            child: Box::new(child),
        }
    }

    /// The constant 1.
    pub fn one() -> Expr {
        Expr::Product {
            factors: Vec::new(),
        }
    }

    /// Free variables.
    pub fn free_vars(&self) -> VSet {
        match self {
            Expr::ObservedJoint { vars } => vars.clone(),
            Expr::Conditional { child, .. } | Expr::Fix { child, .. } => child.free_vars(),
            Expr::Marginal { child, keep } => {
                child.free_vars().intersection(keep).cloned().collect()
            }
            Expr::Product { factors } => factors.iter().flat_map(Expr::free_vars).collect(),
            Expr::SumOver { vars, child } => child.free_vars().difference(vars).cloned().collect(),
            Expr::Substitute { child, assignments } => {
                let mut out = child.free_vars();
                for (a, asg) in assignments {
                    if !matches!(asg, Assignment::Symbolic) && out.remove(a) {
                        out.extend(asg.inputs());
                    }
                }
                out
            }
            Expr::PolicyFactor { policy } => {
                let mut out = policy.inputs.clone();
                out.insert(policy.target.clone());
                out
            }
            Expr::BlockEquilibrium { block, given, .. } => block.union(given).cloned().collect(),
        }
    }

    /// The variables the node is a distribution over.
    pub fn heads(&self) -> VSet {
        if let Some((h, _)) = self.as_prob() {
            return h;
        }
        match self {
            Expr::ObservedJoint { vars } => vars.clone(),
            Expr::Conditional { child, given } => {
                child.heads().difference(given).cloned().collect()
            }
            Expr::Marginal { child, keep } => child.heads().intersection(keep).cloned().collect(),
            Expr::Product { factors } => factors.iter().flat_map(Expr::heads).collect(),
            Expr::SumOver { vars, child } => child.heads().difference(vars).cloned().collect(),
            Expr::Fix { child, vertex, .. } => {
                let mut h = child.heads();
                h.remove(vertex);
                h
            }
            Expr::Substitute { child, assignments } => child
                .heads()
                .into_iter()
                .filter(|v| !assignments.contains_key(v))
                .collect(),
            Expr::PolicyFactor { policy } => VSet::from([policy.target.clone()]),
            Expr::BlockEquilibrium { block, .. } => block.clone(),
        }
    }

    /// Calls `f` on every node, parents first.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Conditional { child, .. }
            | Expr::Marginal { child, .. }
            | Expr::SumOver { child, .. }
            | Expr::Fix { child, .. }
            | Expr::Substitute { child, .. } => child.visit(f),
            Expr::Product { factors } => factors.iter().for_each(|c| c.visit(f)),
            _ => {}
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// True when a `Fix` node appears anywhere.
    pub fn has_fix(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Fix { .. }));
        found
    }
}

/// An identified functional with the metadata needed to render and evaluate it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimand {
    pub expr: Expr,
    /// Vertex depths in the block order of the input graph, used for display order.
    pub order: BTreeMap<String, usize>,
    /// The outcome set.
    pub outcome: VSet,
    /// Free variables the functional does not depend on. They appear when a
    /// kernel is kept in unsimplified fixing form and conditions on vertices
    /// outside the outcome's anterior set.
    pub inert: VSet,
    /// Targets held at symbolic values; free arguments of the functional.
    pub symbolic: VSet,
}
