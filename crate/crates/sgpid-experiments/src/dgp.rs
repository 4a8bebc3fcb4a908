//! The parametric data generating process on a unit network.

use crate::network::Network;
use crate::{stream_rng, ExperimentError, Result};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Number of covariates per unit.
pub const N_COVARIATES: usize = 3;

/// Default Gibbs sweeps over the outcome layer.
pub const DEFAULT_SWEEPS: usize = 50;

/// Coefficients of the covariate, treatment and outcome models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpParams {
    /// `(alpha_j, beta_j)` of `C_j ~ Beta(alpha_j, beta_j)`.
    pub beta_params: [(f64, f64); N_COVARIATES],
    pub gamma: [f64; N_COVARIATES],
    pub tau_ac: f64,
    pub eta: f64,
    pub delta: [f64; N_COVARIATES],
    pub tau_ya: f64,
    pub tau_yy: f64,
    pub tau_yc: f64,
}

const BETA_PARAMS: [(f64, f64); N_COVARIATES] = [(1.5, 3.0), (6.0, 2.0), (0.8, 0.8)];

impl DgpParams {
    /// The bias-study column.
    pub fn bias() -> DgpParams {
        DgpParams {
            beta_params: BETA_PARAMS,
            gamma: [1.0, 0.0, 0.0],
            tau_ac: 0.0,
            eta: -3.0,
            delta: [1.0, 0.0, 0.0],
            tau_ya: 3.0,
            tau_yy: 0.1,
            tau_yc: 0.0,
        }
    }

    /// The policy-study column.
    pub fn policy() -> DgpParams {
        DgpParams {
            beta_params: BETA_PARAMS,
            gamma: [0.5, 0.2, 0.25],
            tau_ac: 0.15,
            eta: 0.6,
            delta: [-0.3, 0.4, 0.1],
            tau_ya: 0.2,
            tau_yy: 0.3,
            tau_yc: -0.2,
        }
    }

    /// The same model with every cross-unit coefficient set to zero.
    pub fn without_interference(&self) -> DgpParams {
        DgpParams { tau_ac: 0.0, tau_ya: 0.0, tau_yy: 0.0, tau_yc: 0.0, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        for (j, &(a, b)) in self.beta_params.iter().enumerate() {
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(ExperimentError::InvalidParameter(format!("beta_params[{j}] = ({a}, {b}) must be positive")));
            }
        }
        let scalars = [self.tau_ac, self.eta, self.tau_ya, self.tau_yy, self.tau_yc];
        if self.gamma.iter().chain(&self.delta).chain(&scalars).any(|x| !x.is_finite()) {
            return Err(ExperimentError::InvalidParameter("coefficients must be finite".into()));
        }
        Ok(())
    }

    /// `p(A_i = 1 | C)` for unit `i`.
    pub fn treatment_probability(&self, net: &Network, c: &[[f64; N_COVARIATES]], i: usize) -> f64 {
        let own: f64 = self.gamma.iter().zip(&c[i]).map(|(g, x)| g * x).sum();
        let nbrs = &net.neighbors[i];
        let spill = if nbrs.is_empty() {
            0.0
        } else {
            self.tau_ac / nbrs.len() as f64 * nbrs.iter().map(|&k| c[k].iter().sum::<f64>()).sum::<f64>()
        };
        expit(own + spill)
    }

    /// `p(Y_i = 1 | A, C, Y_-i)` for unit `i`.
    pub fn outcome_probability(&self, net: &Network, c: &[[f64; N_COVARIATES]], a: &[f64], y: &[f64], i: usize) -> f64 {
        let own = self.eta * a[i] + self.delta.iter().zip(&c[i]).map(|(d, x)| d * x).sum::<f64>();
        let nbrs = &net.neighbors[i];
        let spill = if nbrs.is_empty() {
            0.0
        } else {
            nbrs.iter()
                .map(|&k| self.tau_ya * a[k] + self.tau_yy * y[k] + self.tau_yc * c[k].iter().sum::<f64>())
                .sum::<f64>()
                / nbrs.len() as f64
        };
        expit(own + spill)
    }
}

pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One network replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub c: Vec<[f64; N_COVARIATES]>,
    pub a: Vec<f64>,
    pub y: Vec<f64>,
}

/// iid network replicates on one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkData {
    pub network: Network,
    pub replicates: Vec<Replicate>,
}

impl NetworkData {
    pub fn n_units(&self) -> usize {
        self.network.n_units
    }

    pub fn len(&self) -> usize {
        self.replicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicates.is_empty()
    }

    /// The replicates at `indices`, in that order.
    pub fn resample(&self, indices: &[usize]) -> NetworkData {
        NetworkData { network: self.network.clone(), replicates: indices.iter().map(|&r| self.replicates[r].clone()).collect() }
    }

    /// One row per replicate with columns `C{i}_{j}`, `A{i}`, `Y{i}` unit by unit.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = Vec::new();
        for i in 0..self.n_units() {
            header.extend((1..=N_COVARIATES).map(|j| format!("C{i}_{j}")));
            header.push(format!("A{i}"));
            header.push(format!("Y{i}"));
        }
        out.write_record(&header).map_err(io)?;
        for r in &self.replicates {
            let mut row = Vec::with_capacity(header.len());
            for i in 0..self.n_units() {
                row.extend(r.c[i].iter().map(|x| format!("{x:.12}")));
                row.push(format!("{}", r.a[i]));
                row.push(format!("{}", r.y[i]));
            }
            out.write_record(&row).map_err(io)?;
        }
        out.flush().map_err(|e| ExperimentError::Io(e.to_string()))
    }
}

fn io(e: csv::Error) -> ExperimentError {
    ExperimentError::Io(e.to_string())
}

/// Draw `n_samples` iid network replicates. Replicate `r` uses its own RNG
/// stream, so the result does not depend on the thread count.
pub fn simulate(net: &Network, params: &DgpParams, n_samples: usize, sweeps: usize, seed: u64) -> Result<NetworkData> {
    params.validate()?;
    let betas: Vec<Beta<f64>> = params
        .beta_params
        .iter()
        .map(|&(a, b)| Beta::new(a, b).map_err(|e| ExperimentError::InvalidParameter(e.to_string())))
        .collect::<Result<_>>()?;
    let replicates = (0..n_samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, 0x5349_4d55, r as u64);
            draw_replicate(&mut rng, net, params, &betas, sweeps)
        })
        .collect();
    Ok(NetworkData { network: net.clone(), replicates })
}

fn draw_replicate<R: Rng>(rng: &mut R, net: &Network, params: &DgpParams, betas: &[Beta<f64>], sweeps: usize) -> Replicate {
    let n = net.n_units;
    let c: Vec<[f64; N_COVARIATES]> = (0..n).map(|_| std::array::from_fn(|j| betas[j].sample(rng))).collect();
    let a: Vec<f64> = (0..n).map(|i| bernoulli(rng, params.treatment_probability(net, &c, i))).collect();
    let mut y: Vec<f64> = (0..n).map(|_| bernoulli(rng, 0.5)).collect();
    for _ in 0..sweeps {
        for i in 0..n {
            y[i] = bernoulli(rng, params.outcome_probability(net, &c, &a, &y, i));
        }
    }
    Replicate { c, a, y }
}

fn bernoulli<R: Rng>(rng: &mut R, p: f64) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_zeroing_keeps_unit_terms() {
        for p in [DgpParams::bias(), DgpParams::policy()] {
            p.validate().unwrap();
            let z = p.without_interference();
            assert_eq!((z.tau_ac, z.tau_ya, z.tau_yy, z.tau_yc), (0.0, 0.0, 0.0, 0.0));
            assert_eq!((z.eta, z.gamma, z.delta), (p.eta, p.gamma, p.delta));
        }
        let mut bad = DgpParams::bias();
        bad.beta_params[1].0 = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn simulation_is_seeded() {
        let net = Network::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let a = simulate(&net, &DgpParams::policy(), 50, 10, 9).unwrap();
        let b = simulate(&net, &DgpParams::policy(), 50, 10, 9).unwrap();
        let c = simulate(&net, &DgpParams::policy(), 50, 10, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.replicates.iter().all(|r| r.c.iter().flatten().all(|x| (0.0..=1.0).contains(x))));
    }

    #[test]
    fn expit_is_stable() {
        assert_eq!(expit(0.0), 0.5);
        assert!(expit(-800.0) >= 0.0 && expit(800.0) == 1.0);
    }
}
