//! Symbolic kernels, fixing, reachability and identification of node and
//! policy interventions in segregated graphs.

pub mod canon;
pub mod expr;
pub mod id;
pub mod kernel;
pub mod render;

pub use canon::canonicalize;
pub use expr::{Assignment, BlockMechanism, Estimand, Expr};
pub use id::{
    g_formula_cg, g_formula_dag, id_admg, id_sg, policy_id_admg, policy_id_sg, NodeAssignment,
};
pub use kernel::{
    all_fixing_sequences, district_kernel, district_kernel_ordered, fix_vertex, fixable,
    initial_factors, initial_factors_in, kernel_condition, kernel_marginalize, markov_pillow, reachable,
};
pub use render::{render, render_expr, Format};

use serde::Serialize;
use sgpid_graph::{GraphClass, GraphError, MixedGraph, VSet};
use sgpid_intervention::InterventionError;
use sgpid_projection::ProjectionError;

/// Errors raised by kernel operations and identification.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimandError {
    #[error("{algorithm} requires a graph of class {expected:?}")]
    WrongClass {
        algorithm: &'static str,
        expected: GraphClass,
    },
    #[error("outcome `{0}` is also an intervention target")]
    OutcomeIsTarget(String),
    #[error("the outcome set is empty")]
    EmptyOutcome,
    #[error("`{vertex}` is not fixable")]
    NotFixable { vertex: String },
    #[error("variables {0:?} are not random in the kernel")]
    OutOfScope(Vec<String>),
    #[error("input `{input}` of the policy on `{target}` does not precede it")]
    PrecedenceViolation { target: String, input: String },
    #[error(transparent)]
    Intervention(#[from] InterventionError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, EstimandError>;

/// Outcome of an identification query.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IdResult {
    Identified(Estimand),
    /// A district whose kernel cannot be reached, with the graph it was
    /// checked in.
    NotIdentified {
        district: VSet,
        graph: MixedGraph,
    },
}

impl IdResult {
    pub fn estimand(&self) -> Option<&Estimand> {
        match self {
            IdResult::Identified(e) => Some(e),
            IdResult::NotIdentified { .. } => None,
        }
    }
}
