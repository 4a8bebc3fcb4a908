//! Finite-state numeric semantics: tables, structural models, exact block
//! equilibria and joints, a Gibbs sampler, the interventional oracle, and
//! evaluation of estimand expressions.

pub mod dataset;
pub mod eval;
pub mod model;
pub mod table;

pub use dataset::Dataset;
pub use eval::{evaluate, evaluate_estimand, fix_table, INERT_TOL};
pub use model::{
    block_equilibrium_exact, cg_joint_exact, cg_sample, explicit_latents, intervened_joint_exact,
    observed_joint, Cpd, StructuralModel, System, EQUILIBRIUM_MAX_ITER, EQUILIBRIUM_TOL,
};
pub use table::{DiscreteDistribution, Table};

use sgpid_graph::{Edge, GraphError, VSet};
use sgpid_intervention::InterventionError;

/// Errors raised by numeric evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("malformed table: {0}")]
    BadTable(String),
    #[error("division of a positive entry by zero (support violation)")]
    ZeroDivision,
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("mechanism of `{0}` has a zero entry")]
    NonPositive(String),
    #[error("mechanism of `{vertex}` reads {found:?}, expected {expected:?}")]
    MechanismMismatch { vertex: String, expected: VSet, found: VSet },
    #[error("bidirected edge {0:?} needs an explicit latent")]
    Bidirected(Edge),
    #[error("policy on `{0}` has no numeric mechanism")]
    UnresolvedPolicy(String),
    #[error("the mechanisms depend on each other cyclically across blocks")]
    Cyclic,
    #[error("{0:?} is not a block of the system")]
    NotABlock(VSet),
    #[error("the equilibrium of block {0:?} did not converge")]
    NoConvergence(VSet),
    #[error("the estimand varies with the inert variable `{0}`")]
    InertVaries(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Intervention(#[from] InterventionError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
