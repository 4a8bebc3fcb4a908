//! Outcome models on network data and the plug-in policy value.

use crate::dgp::{NetworkData, Replicate, N_COVARIATES};
use crate::logistic::{fit_logistic, LogisticFit};
use crate::network::Network;
use crate::{stream_rng, ExperimentError, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A logistic model over a feature vector, with identically zero columns
/// dropped before fitting (isolated units have no neighbour features).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub keep: Vec<bool>,
    pub fit: LogisticFit,
}

impl Model {
    pub fn fit(rows: &[Vec<f64>], y: &[f64]) -> Result<Model> {
        let width = rows.first().ok_or(ExperimentError::EmptyData)?.len();
        let keep: Vec<bool> = (0..width).map(|j| rows.iter().any(|r| r[j] != 0.0)).collect();
        let x: Vec<Vec<f64>> = rows.iter().map(|r| select(&keep, r)).collect();
        Ok(Model { fit: fit_logistic(&x, y)?, keep })
    }

    pub fn predict(&self, features: &[f64]) -> f64 {
        self.fit.predict(&select(&self.keep, features))
    }

    /// The coefficient of feature `j`, zero when the column was dropped.
    pub fn coefficient(&self, j: usize) -> f64 {
        if !self.keep[j] {
            return 0.0;
        }
        self.fit.coef[self.keep[..j].iter().filter(|&&k| k).count()]
    }
}

fn select(keep: &[bool], row: &[f64]) -> Vec<f64> {
    row.iter().zip(keep).filter(|(_, &k)| k).map(|(v, _)| *v).collect()
}

fn neighbor_mean(net: &Network, i: usize, f: impl Fn(usize) -> f64) -> f64 {
    let nbrs = &net.neighbors[i];
    if nbrs.is_empty() {
        0.0
    } else {
        nbrs.iter().map(|&k| f(k)).sum::<f64>() / nbrs.len() as f64
    }
}

/// `[1, A_i, C_i]`.
pub fn unit_features(c: &[[f64; N_COVARIATES]], a: &[f64], i: usize) -> Vec<f64> {
    let mut x = vec![1.0, a[i]];
    x.extend(c[i]);
    x
}

/// `[1, A_i, C_i, mean A_N(i), mean sum C_N(i)]`, the design of `E[Y_i | A, C]`.
pub fn marginal_features(net: &Network, c: &[[f64; N_COVARIATES]], a: &[f64], i: usize) -> Vec<f64> {
    let mut x = unit_features(c, a, i);
    x.push(neighbor_mean(net, i, |k| a[k]));
    x.push(neighbor_mean(net, i, |k| c[k].iter().sum()));
    x
}

/// `[1, A_i, C_i, mean A_N(i), mean Y_N(i), mean sum C_N(i)]`, the design of
/// `E[Y_i | A, C, Y_-i]`.
pub fn conditional_features(net: &Network, c: &[[f64; N_COVARIATES]], a: &[f64], mean_y: f64, i: usize) -> Vec<f64> {
    let mut x = unit_features(c, a, i);
    x.push(neighbor_mean(net, i, |k| a[k]));
    x.push(mean_y);
    x.push(neighbor_mean(net, i, |k| c[k].iter().sum()));
    x
}

/// Index of the `mean Y_N(i)` column of [`conditional_features`].
pub const MEAN_Y_COLUMN: usize = 2 + N_COVARIATES + 1;

/// Models for `E[Y_k | A, C]` and `E[Y_i | A, C, Y_-i]`, each pooled over units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceModels {
    pub marginal: Model,
    pub conditional: Model,
}

fn pooled(data: &NetworkData, features: impl Fn(&Replicate, usize) -> Vec<f64>) -> Result<Model> {
    if data.is_empty() {
        return Err(ExperimentError::EmptyData);
    }
    let mut x = Vec::with_capacity(data.len() * data.n_units());
    let mut y = Vec::with_capacity(x.capacity());
    for r in &data.replicates {
        for i in 0..data.n_units() {
            x.push(features(r, i));
            y.push(r.y[i]);
        }
    }
    Model::fit(&x, &y)
}

pub fn fit_nuisance(data: &NetworkData) -> Result<NuisanceModels> {
    let net = &data.network;
    let marginal = pooled(data, |r, i| marginal_features(net, &r.c, &r.a, i))?;
    let conditional = pooled(data, |r, i| {
        conditional_features(net, &r.c, &r.a, neighbor_mean(net, i, |k| r.y[k]), i)
    })?;
    Ok(NuisanceModels { marginal, conditional })
}

/// The single-unit model `E[Y_i | A_i, C_i]` that ignores the network.
pub fn fit_iid(data: &NetworkData) -> Result<Model> {
    pooled(data, |r, i| unit_features(&r.c, &r.a, i))
}

/// ACE of setting every treatment to 1 versus 0 under the single-unit model,
/// averaged over units and the empirical covariates.
pub fn ace_iid(model: &Model, data: &NetworkData) -> f64 {
    average_over_units(data, |r, i| {
        let at = |v: f64| model.predict(&unit_features(&r.c, &vec![v; r.a.len()], i));
        at(1.0) - at(0.0)
    })
}

/// The same contrast under the network-aware marginal outcome model.
pub fn ace_network(models: &NuisanceModels, data: &NetworkData) -> f64 {
    average_over_units(data, |r, i| {
        let at = |v: f64| models.marginal.predict(&marginal_features(&data.network, &r.c, &vec![v; r.a.len()], i));
        at(1.0) - at(0.0)
    })
}

fn average_over_units(data: &NetworkData, f: impl Fn(&Replicate, usize) -> f64) -> f64 {
    let n = data.n_units();
    let total: f64 = data.replicates.iter().map(|r| (0..n).map(|i| f(r, i)).sum::<f64>()).sum();
    total / (n * data.len()) as f64
}

/// Coefficient grid of the policy class `A_i = clip(mean_j k_j C_ij, 0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyClass {
    pub grid: [Vec<f64>; N_COVARIATES],
}

impl Default for PolicyClass {
    fn default() -> PolicyClass {
        PolicyClass::uniform(-1.0, 1.0, 0.25)
    }
}

impl PolicyClass {
    /// Every coordinate on `{lo, lo + step, ..., hi}`.
    pub fn uniform(lo: f64, hi: f64, step: f64) -> PolicyClass {
        let n = ((hi - lo) / step).round() as usize;
        let axis: Vec<f64> = (0..=n).map(|s| lo + s as f64 * step).collect();
        PolicyClass { grid: std::array::from_fn(|_| axis.clone()) }
    }

    pub fn validate(&self) -> Result<()> {
        for (j, axis) in self.grid.iter().enumerate() {
            if axis.is_empty() || axis.iter().any(|v| !v.is_finite()) {
                return Err(ExperimentError::InvalidParameter(format!("grid[{j}] must be a nonempty list of finite numbers")));
            }
        }
        Ok(())
    }

    /// Each axis sorted and deduplicated, then all points in lexicographic order.
    pub fn points(&self) -> Vec<[f64; N_COVARIATES]> {
        let axes: Vec<Vec<f64>> = self
            .grid
            .iter()
            .map(|a| {
                let mut a = a.clone();
                a.sort_by(f64::total_cmp);
                a.dedup();
                a
            })
            .collect();
        let mut out = Vec::new();
        for &x in &axes[0] {
            for &y in &axes[1] {
                for &z in &axes[2] {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }

    /// Each axis with midpoints inserted between neighbours.
    pub fn refined(&self) -> PolicyClass {
        PolicyClass {
            grid: std::array::from_fn(|j| {
                let mut a = self.grid[j].clone();
                a.sort_by(f64::total_cmp);
                a.dedup();
                let mids: Vec<f64> = a.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
                a.extend(mids);
                a.sort_by(f64::total_cmp);
                a
            }),
        }
    }
}

/// Treatment probability assigned by policy `k` to covariates `c`.
pub fn policy_probability(k: &[f64; N_COVARIATES], c: &[f64; N_COVARIATES]) -> f64 {
    (k.iter().zip(c).map(|(k, c)| k * c).sum::<f64>() / N_COVARIATES as f64).clamp(0.0, 1.0)
}

/// Plug-in evaluation of policies on one target unit.
///
/// For each drawn `(A, C)` row the expected outcome of the target under
/// `A_i = 0` and `A_i = 1` is computed exactly: neighbour outcomes are
/// independent Bernoulli draws from the marginal model, so their mean has a
/// Poisson-binomial law, and the conditional model is averaged over it. A
/// policy value is then linear in the assigned treatment probability.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEvaluator {
    pub unit: usize,
    covariates: Vec<[f64; N_COVARIATES]>,
    observed: Vec<f64>,
    outcome0: Vec<f64>,
    outcome1: Vec<f64>,
}

impl PolicyEvaluator {
    /// Rows are all replicates when `mc_draws` is `None`, otherwise
    /// `mc_draws` replicates drawn with replacement using `seed`.
    pub fn new(models: &NuisanceModels, data: &NetworkData, unit: usize, mc_draws: Option<usize>, seed: u64) -> Result<PolicyEvaluator> {
        if data.is_empty() {
            return Err(ExperimentError::EmptyData);
        }
        if unit >= data.n_units() {
            return Err(ExperimentError::InvalidParameter(format!("unit {unit} is not in the network")));
        }
        let rows: Vec<usize> = match mc_draws {
            None => (0..data.len()).collect(),
            Some(m) => {
                let mut rng = stream_rng(seed, 0x4d43, 0);
                (0..m).map(|_| rng.random_range(0..data.len())).collect()
            }
        };
        let mut ev = PolicyEvaluator { unit, covariates: vec![], observed: vec![], outcome0: vec![], outcome1: vec![] };
        for r in rows {
            let rep = &data.replicates[r];
            ev.covariates.push(rep.c[unit]);
            ev.observed.push(rep.a[unit]);
            ev.outcome0.push(expected_outcome(models, &data.network, rep, unit, 0.0));
            ev.outcome1.push(expected_outcome(models, &data.network, rep, unit, 1.0));
        }
        Ok(ev)
    }

    pub fn value(&self, k: &[f64; N_COVARIATES]) -> f64 {
        self.mean(|r| policy_probability(k, &self.covariates[r]))
    }

    /// The value under the observed treatments.
    pub fn status_quo(&self) -> f64 {
        self.mean(|r| self.observed[r])
    }

    fn mean(&self, prob: impl Fn(usize) -> f64) -> f64 {
        let n = self.covariates.len();
        (0..n).map(|r| self.outcome0[r] + prob(r) * (self.outcome1[r] - self.outcome0[r])).sum::<f64>() / n as f64
    }
}

fn expected_outcome(models: &NuisanceModels, net: &Network, rep: &Replicate, unit: usize, treat: f64) -> f64 {
    let mut a = rep.a.clone();
    a[unit] = treat;
    let nbrs = &net.neighbors[unit];
    let mut law = vec![1.0];
    for &k in nbrs {
        let p = models.marginal.predict(&marginal_features(net, &rep.c, &a, k));
        let mut next = vec![0.0; law.len() + 1];
        for (s, w) in law.iter().enumerate() {
            next[s] += w * (1.0 - p);
            next[s + 1] += w * p;
        }
        law = next;
    }
    let denom = nbrs.len().max(1) as f64;
    law.iter()
        .enumerate()
        .map(|(s, w)| w * models.conditional.predict(&conditional_features(net, &rep.c, &a, s as f64 / denom, unit)))
        .sum()
}

/// The plug-in value of policy `k` for `unit`.
pub fn estimate_policy_value(
    models: &NuisanceModels,
    data: &NetworkData,
    k: &[f64; N_COVARIATES],
    unit: usize,
    mc_draws: Option<usize>,
    seed: u64,
) -> Result<f64> {
    Ok(PolicyEvaluator::new(models, data, unit, mc_draws, seed)?.value(k))
}

/// Exhaustive grid search; ties go to the lexicographically smallest `k`.
pub fn optimize_policy(ev: &PolicyEvaluator, class: &PolicyClass) -> Result<([f64; N_COVARIATES], f64)> {
    class.validate()?;
    let points = class.points();
    let values: Vec<f64> = points.par_iter().map(|k| ev.value(k)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok((points[best], values[best]))
}
