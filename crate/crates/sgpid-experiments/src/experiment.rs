//! The bias and policy studies with percentile bootstrap intervals.

use crate::dgp::{simulate, DgpParams, NetworkData, DEFAULT_SWEEPS, N_COVARIATES};
use crate::network::{generate_network, GeneratorKind, NetworkSpec};
use crate::nuisance::{ace_iid, ace_network, fit_iid, fit_nuisance, optimize_policy, PolicyClass, PolicyEvaluator};
use crate::{derive_seed, stream_rng, ExperimentError, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// DGP coefficients given by preset name or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsSpec {
    Preset(Preset),
    Explicit(DgpParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Bias,
    Policy,
}

impl ParamsSpec {
    pub fn resolve(&self) -> DgpParams {
        match self {
            ParamsSpec::Preset(Preset::Bias) => DgpParams::bias(),
            ParamsSpec::Preset(Preset::Policy) => DgpParams::policy(),
            ParamsSpec::Explicit(p) => p.clone(),
        }
    }
}

fn default_generators() -> Vec<GeneratorKind> {
    GeneratorKind::ALL.to_vec()
}
fn default_densities() -> Vec<f64> {
    vec![0.2, 0.4, 0.6, 0.8]
}
fn default_units() -> usize {
    10
}
fn default_rewiring() -> f64 {
    0.1
}
fn default_samples() -> usize {
    1000
}
fn default_bootstrap() -> usize {
    200
}
fn default_sweeps() -> usize {
    DEFAULT_SWEEPS
}

/// Experiment configuration as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_generators")]
    pub generators: Vec<GeneratorKind>,
    #[serde(default = "default_densities")]
    pub densities: Vec<f64>,
    #[serde(default = "default_units")]
    pub n_units: usize,
    /// Watts-Strogatz rewiring probability.
    #[serde(default = "default_rewiring")]
    pub rewiring: f64,
    pub params: ParamsSpec,
    /// Zero every cross-unit coefficient of `params`.
    #[serde(default)]
    pub zero_interference: bool,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_bootstrap")]
    pub n_bootstrap: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default)]
    pub grid: PolicyClass,
    /// Target unit of the policy study.
    #[serde(default)]
    pub unit: usize,
    /// Rows drawn for the plug-in value; all rows when absent.
    #[serde(default)]
    pub mc_draws: Option<usize>,
}

fn field(path: &str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::InvalidConfig { path: path.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| field(&format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.as_ref().display())))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(field("generators", "must be nonempty"));
        }
        if self.densities.is_empty() {
            return Err(field("densities", "must be nonempty"));
        }
        for (i, d) in self.densities.iter().enumerate() {
            if !(0.0..=1.0).contains(d) {
                return Err(field(&format!("densities[{i}]"), format!("{d} is not in [0, 1]")));
            }
        }
        if self.n_units < 2 {
            return Err(field("n_units", "needs at least 2 units"));
        }
        if !(0.0..=1.0).contains(&self.rewiring) {
            return Err(field("rewiring", "must be in [0, 1]"));
        }
        if self.n_samples == 0 {
            return Err(field("n_samples", "must be positive"));
        }
        if self.n_bootstrap == 0 {
            return Err(field("n_bootstrap", "must be positive"));
        }
        if self.unit >= self.n_units {
            return Err(field("unit", format!("{} is not below n_units = {}", self.unit, self.n_units)));
        }
        if self.mc_draws == Some(0) {
            return Err(field("mc_draws", "must be positive"));
        }
        self.params().validate().map_err(|e| field("params", e.to_string()))?;
        self.grid.validate().map_err(|e| field("grid", e.to_string()))
    }

    /// The DGP coefficients after `zero_interference`.
    pub fn params(&self) -> DgpParams {
        let p = self.params.resolve();
        if self.zero_interference {
            p.without_interference()
        } else {
            p
        }
    }

    /// Network spec of configuration cell `(g, d)`.
    pub fn network_spec(&self, g: usize, d: usize) -> NetworkSpec {
        NetworkSpec {
            generator: self.generators[g].at_density(self.densities[d], self.n_units, self.rewiring),
            n_units: self.n_units,
            seed: derive_seed(self.seed, TAG_NETWORK, cell(g, d)),
        }
    }

    /// Simulated data of configuration cell `(g, d)`.
    pub fn cell_data(&self, g: usize, d: usize) -> Result<NetworkData> {
        let (net, _) = generate_network(&self.network_spec(g, d))?;
        simulate(&net, &self.params(), self.n_samples, self.sweeps, derive_seed(self.seed, TAG_SIMULATE, cell(g, d)))
    }
}

const TAG_NETWORK: u64 = 1;
const TAG_SIMULATE: u64 = 2;
const TAG_BOOTSTRAP: u64 = 3;

fn cell(g: usize, d: usize) -> u64 {
    ((g as u64) << 32) | d as u64
}

/// A point estimate with its percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub boot_mean: f64,
    pub lo: f64,
    pub hi: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

impl Interval {
    pub fn covers(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Linear-interpolation quantile of sorted values.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// 95% percentile interval of `draws` around `estimate`. Failed replicates
/// are counted and left out.
pub fn percentile_interval(estimate: f64, draws: &[Option<f64>]) -> Interval {
    let mut ok: Vec<f64> = draws.iter().flatten().copied().collect();
    ok.sort_by(f64::total_cmp);
    let n_failed = draws.len() - ok.len();
    if ok.is_empty() {
        return Interval { estimate, boot_mean: f64::NAN, lo: f64::NAN, hi: f64::NAN, n_ok: 0, n_failed };
    }
    Interval {
        estimate,
        boot_mean: ok.iter().sum::<f64>() / ok.len() as f64,
        lo: quantile(&ok, 0.025),
        hi: quantile(&ok, 0.975),
        n_ok: ok.len(),
        n_failed,
    }
}

/// Resample whole network replicates `n_boot` times; replicate `b` draws
/// its indices from its own stream.
pub fn bootstrap<T: Send>(data: &NetworkData, n_boot: usize, seed: u64, f: impl Fn(&NetworkData) -> Result<T> + Sync) -> Vec<Result<T>> {
    (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, TAG_BOOTSTRAP, b as u64);
            let idx: Vec<usize> = (0..data.len()).map(|_| rng.random_range(0..data.len())).collect();
            f(&data.resample(&idx))
        })
        .collect()
}

/// One cell of the bias study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCell {
    pub generator: GeneratorKind,
    pub density: f64,
    pub unit_edges: usize,
    pub ace_iid: f64,
    pub ace_network: f64,
    pub bias: Interval,
    pub replicates: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub config: ExperimentConfig,
    pub cells: Vec<BiasCell>,
}

fn bias_estimates(data: &NetworkData) -> Result<(f64, f64)> {
    let iid = ace_iid(&fit_iid(data)?, data);
    let net = ace_network(&fit_nuisance(data)?, data);
    Ok((iid, net))
}

/// ACE under single-unit models minus ACE under network-aware models, with
/// both contrasts setting every treatment to 1 versus 0.
pub fn bias_experiment(cfg: &ExperimentConfig) -> Result<BiasReport> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for g in 0..cfg.generators.len() {
        for d in 0..cfg.densities.len() {
            let data = cfg.cell_data(g, d)?;
            let (iid, net) = bias_estimates(&data)?;
            let draws: Vec<Option<f64>> = bootstrap(&data, cfg.n_bootstrap, derive_seed(cfg.seed, TAG_BOOTSTRAP, cell(g, d)), |b| {
                bias_estimates(b).map(|(i, n)| i - n)
            })
            .into_iter()
            .map(|r| r.ok())
            .collect();
            cells.push(BiasCell {
                generator: cfg.generators[g],
                density: cfg.densities[d],
                unit_edges: data.network.n_edges(),
                ace_iid: iid,
                ace_network: net,
                bias: percentile_interval(iid - net, &draws),
                replicates: draws,
            });
        }
    }
    Ok(BiasReport { config: cfg.clone(), cells })
}

/// Result of optimizing on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFit {
    pub k: [f64; N_COVARIATES],
    pub optimized: f64,
    pub status_quo: f64,
}

impl PolicyFit {
    pub fn improvement(&self) -> f64 {
        self.optimized - self.status_quo
    }
}

/// Fit nuisances, optimize over `class`, and evaluate the status quo with
/// the same plug-in evaluator.
pub fn fit_policy(data: &NetworkData, class: &PolicyClass, unit: usize, mc_draws: Option<usize>, seed: u64) -> Result<PolicyFit> {
    let models = fit_nuisance(data)?;
    let ev = PolicyEvaluator::new(&models, data, unit, mc_draws, seed)?;
    let (k, optimized) = optimize_policy(&ev, class)?;
    Ok(PolicyFit { k, optimized, status_quo: ev.status_quo() })
}

/// One cell of the policy study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCell {
    pub generator: GeneratorKind,
    pub density: f64,
    pub unit_edges: usize,
    pub fit: PolicyFit,
    /// Sample mean of the target's observed outcome.
    pub observed_mean: f64,
    pub improvement: Interval,
    pub replicates: Vec<Option<PolicyFit>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub config: ExperimentConfig,
    pub cells: Vec<PolicyCell>,
}

/// Optimized minus status-quo value of the target unit per cell, with the
/// nuisances refitted and the policy reoptimized in every bootstrap replicate.
pub fn policy_experiment(cfg: &ExperimentConfig) -> Result<PolicyReport> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for g in 0..cfg.generators.len() {
        for d in 0..cfg.densities.len() {
            let data = cfg.cell_data(g, d)?;
            let seed = derive_seed(cfg.seed, TAG_BOOTSTRAP, cell(g, d));
            let fit = fit_policy(&data, &cfg.grid, cfg.unit, cfg.mc_draws, seed)?;
            let reps: Vec<Option<PolicyFit>> =
                bootstrap(&data, cfg.n_bootstrap, seed, |b| fit_policy(b, &cfg.grid, cfg.unit, cfg.mc_draws, seed))
                    .into_iter()
                    .map(|r| r.ok())
                    .collect();
            let draws: Vec<Option<f64>> = reps.iter().map(|r| r.as_ref().map(PolicyFit::improvement)).collect();
            cells.push(PolicyCell {
                generator: cfg.generators[g],
                density: cfg.densities[d],
                unit_edges: data.network.n_edges(),
                observed_mean: data.replicates.iter().map(|r| r.y[cfg.unit]).sum::<f64>() / data.len() as f64,
                improvement: percentile_interval(fit.improvement(), &draws),
                fit,
                replicates: reps,
            });
        }
    }
    Ok(PolicyReport { config: cfg.clone(), cells })
}

/// An outcome change in percentage points, e.g. `0.05` as "5.0% increase".
pub fn format_change(x: f64) -> String {
    if x < 0.0 {
        format!("{:.1}% decrease", -100.0 * x)
    } else {
        format!("{:.1}% increase", 100.0 * x)
    }
}

/// Summary CSV, plot series CSV and JSON detail written to `dir`.
pub trait Report: Serialize {
    fn summary_header(&self) -> Vec<&'static str>;
    fn summary_rows(&self) -> Vec<Vec<String>>;
    /// `(series, x, y, lo, hi)` rows.
    fn plot_rows(&self) -> Vec<(String, f64, f64, f64, f64)>;

    fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.summary_header()).map_err(io)?;
        for row in self.summary_rows() {
            w.write_record(&row).map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| ExperimentError::Io(e.to_string()))?).map_err(|e| ExperimentError::Io(e.to_string()))
    }

    fn plot_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["series", "x", "y", "lo", "hi"]).map_err(io)?;
        for (s, x, y, lo, hi) in self.plot_rows() {
            w.write_record([s, num(x), num(y), num(lo), num(hi)]).map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| ExperimentError::Io(e.to_string()))?).map_err(|e| ExperimentError::Io(e.to_string()))
    }

    fn write_to(&self, dir: &Path) -> Result<()> {
        let w = |name: &str, text: String| {
            std::fs::write(dir.join(name), text).map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.join(name).display())))
        };
        std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Io(e.to_string()))?;
        w("summary.csv", self.summary_csv()?)?;
        w("plot.csv", self.plot_csv()?)?;
        w("detail.json", serde_json::to_string_pretty(self).map_err(|e| ExperimentError::Io(e.to_string()))? + "\n")
    }
}

fn io(e: csv::Error) -> ExperimentError {
    ExperimentError::Io(e.to_string())
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

impl Report for BiasReport {
    fn summary_header(&self) -> Vec<&'static str> {
        vec!["generator", "density", "unit_edges", "ace_iid", "ace_network", "bias", "ci_lo", "ci_hi", "boot_mean", "n_ok", "n_failed", "excludes_zero"]
    }

    fn summary_rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                vec![
                    c.generator.name().to_string(),
                    num(c.density),
                    c.unit_edges.to_string(),
                    num(c.ace_iid),
                    num(c.ace_network),
                    num(c.bias.estimate),
                    num(c.bias.lo),
                    num(c.bias.hi),
                    num(c.bias.boot_mean),
                    c.bias.n_ok.to_string(),
                    c.bias.n_failed.to_string(),
                    (!c.bias.covers(0.0)).to_string(),
                ]
            })
            .collect()
    }

    fn plot_rows(&self) -> Vec<(String, f64, f64, f64, f64)> {
        self.cells.iter().map(|c| (c.generator.name().to_string(), c.density, c.bias.estimate, c.bias.lo, c.bias.hi)).collect()
    }
}

impl Report for PolicyReport {
    fn summary_header(&self) -> Vec<&'static str> {
        vec![
            "generator", "density", "unit_edges", "k1", "k2", "k3", "optimized", "status_quo", "observed_mean", "improvement", "ci_lo",
            "ci_hi", "boot_mean", "n_ok", "n_failed", "change",
        ]
    }

    fn summary_rows(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                vec![
                    c.generator.name().to_string(),
                    num(c.density),
                    c.unit_edges.to_string(),
                    num(c.fit.k[0]),
                    num(c.fit.k[1]),
                    num(c.fit.k[2]),
                    num(c.fit.optimized),
                    num(c.fit.status_quo),
                    num(c.observed_mean),
                    num(c.improvement.estimate),
                    num(c.improvement.lo),
                    num(c.improvement.hi),
                    num(c.improvement.boot_mean),
                    c.improvement.n_ok.to_string(),
                    c.improvement.n_failed.to_string(),
                    format_change(c.improvement.boot_mean),
                ]
            })
            .collect()
    }

    fn plot_rows(&self) -> Vec<(String, f64, f64, f64, f64)> {
        self.cells
            .iter()
            .map(|c| (c.generator.name().to_string(), c.density, c.improvement.boot_mean, c.improvement.lo, c.improvement.hi))
            .collect()
    }
}
