//! Unregularized logistic regression by iteratively reweighted least squares.

use crate::dgp::expit;
use crate::{ExperimentError, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const IRLS_TOL: f64 = 1e-8;
pub const IRLS_MAX_ITER: usize = 100;

/// Fitted coefficients and convergence status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub coef: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl LogisticFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        expit(self.linear(x))
    }

    pub fn linear(&self, x: &[f64]) -> f64 {
        self.coef.iter().zip(x).map(|(b, v)| b * v).sum()
    }
}

/// Fit `P(y = 1 | x) = expit(x . b)` on the rows of `x`.
///
/// Newton steps stop when the largest coefficient change is below
/// [`IRLS_TOL`]. A constant outcome, fitted probabilities that reproduce
/// the outcome exactly, or a weighted Gram matrix that loses positive
/// definiteness are reported as separation; a singular design is reported
/// as rank deficiency.
pub fn fit_logistic(x: &[Vec<f64>], y: &[f64]) -> Result<LogisticFit> {
    let n = x.len();
    if n == 0 || n != y.len() {
        return Err(ExperimentError::EmptyData);
    }
    let p = x[0].len();
    if x.iter().any(|r| r.len() != p) {
        return Err(ExperimentError::InvalidParameter("ragged design matrix".into()));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(ExperimentError::Separation("the outcome is constant".into()));
    }
    let xm = DMatrix::from_fn(n, p, |i, j| x[i][j]);
    let yv = DVector::from_column_slice(y);
    if (xm.transpose() * &xm).cholesky().is_none() {
        return Err(ExperimentError::RankDeficient);
    }
    let mut b = DVector::zeros(p);
    for it in 1..=IRLS_MAX_ITER {
        let eta = &xm * &b;
        let mu = eta.map(expit);
        let w = mu.map(|m| m * (1.0 - m));
        let mut xtwx = DMatrix::zeros(p, p);
        for i in 0..n {
            let row = xm.row(i);
            xtwx += w[i] * row.transpose() * row;
        }
        let grad = xm.transpose() * (&yv - &mu);
        let Some(chol) = xtwx.cholesky() else {
            return Err(ExperimentError::Separation("weights vanished during fitting".into()));
        };
        let step = chol.solve(&grad);
        b += &step;
        if !b.iter().all(|v| v.is_finite()) {
            return Err(ExperimentError::Separation("coefficients diverged".into()));
        }
        if step.amax() < IRLS_TOL {
            return Ok(LogisticFit { coef: b.iter().copied().collect(), converged: true, iterations: it });
        }
    }
    let mu = (&xm * &b).map(expit);
    if mu.iter().zip(y).all(|(m, v)| (m - v).abs() < 1e-6) {
        return Err(ExperimentError::Separation("fitted probabilities reproduce the outcome".into()));
    }
    Ok(LogisticFit { coef: b.iter().copied().collect(), converged: false, iterations: IRLS_MAX_ITER })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn simulate(n: usize, truth: &[f64], seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let mut row = vec![1.0];
            row.extend((1..truth.len()).map(|_| rng.random_range(-1.0..1.0)));
            let p = expit(truth.iter().zip(&row).map(|(b, v)| b * v).sum());
            y.push(if rng.random::<f64>() < p { 1.0 } else { 0.0 });
            x.push(row);
        }
        (x, y)
    }

    #[test]
    fn recovers_coefficients() {
        let truth = [-0.5, 1.0, 2.0, -1.5];
        let (x, y) = simulate(100_000, &truth, 1);
        let fit = fit_logistic(&x, &y).unwrap();
        assert!(fit.converged);
        for (b, t) in fit.coef.iter().zip(truth) {
            assert!((b - t).abs() < 0.05, "{b} vs {t}");
        }
    }

    #[test]
    fn intercept_only_on_fair_coins() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y: Vec<f64> = (0..20_000).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let x = vec![vec![1.0]; y.len()];
        let fit = fit_logistic(&x, &y).unwrap();
        assert!(fit.coef[0].abs() < 0.05);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((fit.coef[0] - (mean / (1.0 - mean)).ln()).abs() < 1e-10);
    }

    #[test]
    fn degenerate_inputs_are_flagged() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        assert!(matches!(fit_logistic(&x, &[1.0; 10]), Err(ExperimentError::Separation(_))));
        let y: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 1.0 }).collect();
        assert!(matches!(fit_logistic(&x, &y), Err(ExperimentError::Separation(_))));
        let collinear: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        assert_eq!(fit_logistic(&collinear, &y), Err(ExperimentError::RankDeficient));
    }
}
