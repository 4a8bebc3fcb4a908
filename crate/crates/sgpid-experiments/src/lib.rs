//! Partial-interference simulations on unit networks: network generators,
//! the parametric data generating process, logistic nuisance models,
//! plug-in policy values and grid optimization, and the bias and policy
//! studies with bootstrap intervals.

pub mod dgp;
pub mod experiment;
pub mod logistic;
pub mod network;
pub mod nuisance;

pub use dgp::{expit, simulate, DgpParams, NetworkData, Replicate, DEFAULT_SWEEPS, N_COVARIATES};
pub use experiment::{
    bias_experiment, bootstrap, fit_policy, format_change, percentile_interval, policy_experiment, quantile, BiasCell,
    BiasReport, ExperimentConfig, Interval, ParamsSpec, PolicyCell, PolicyFit, PolicyReport, Preset, Report,
};
pub use logistic::{fit_logistic, LogisticFit, IRLS_MAX_ITER, IRLS_TOL};
pub use network::{generate_network, Generator, GeneratorKind, Network, NetworkSpec};
pub use nuisance::{
    ace_iid, ace_network, estimate_policy_value, fit_iid, fit_nuisance, optimize_policy, policy_probability, Model,
    NuisanceModels, PolicyClass, PolicyEvaluator,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sgpid_graph::GraphError;

/// Errors raised by the experiment pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config field `{path}`: {message}")]
    InvalidConfig { path: String, message: String },
    #[error("no data")]
    EmptyData,
    #[error("separation: {0}")]
    Separation(String),
    #[error("the design matrix is rank deficient")]
    RankDeficient,
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A child seed of `seed` for purpose `tag` and index `index`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(tag)) ^ index)
}

/// The RNG stream `index` of `seed` for purpose `tag`.
pub fn stream_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)));
    rng.set_stream(index);
    rng
}
