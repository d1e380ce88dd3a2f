//! Bayesian ridge regression fitted by evidence maximization.
//!
//! The model is `y = Xw + b + ε` with `ε ~ N(0, 1/α)` and prior
//! `w ~ N(0, I/λ)`, α and λ carrying Gamma hyperpriors. Both precisions are
//! re-estimated from the data (MacKay updates) until the weights settle:
//!
//! ```text
//! w = α (α XᵀX + λ I)⁻¹ Xᵀy
//! γ = Σ_d α s_d / (λ + α s_d)          s_d: eigenvalues of XᵀX
//! λ ← (γ + 2 λ₁) / (‖w‖² + 2 λ₂)
//! α ← (n − γ + 2 α₁) / (‖y − Xw‖² + 2 α₂)
//! ```
//!
//! X and y are centered first; the intercept is recovered afterwards. One
//! eigendecomposition of the Gram matrix serves every iteration and also
//! stores the posterior covariance in factored form.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesianRidgeConfig {
    /// Gamma shape/rate hyperpriors on α.
    pub alpha_1: f64,
    pub alpha_2: f64,
    /// Gamma shape/rate hyperpriors on λ.
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Defaults to `1 / var(y)` (1 when y is constant).
    pub alpha_init: Option<f64>,
    /// Defaults to 1.
    pub lambda_init: Option<f64>,
    /// When false α and λ stay at their initial values (plain ridge).
    pub update_precisions: bool,
}

impl Default for BayesianRidgeConfig {
    fn default() -> Self {
        Self {
            alpha_1: 1e-6,
            alpha_2: 1e-6,
            lambda_1: 1e-6,
            lambda_2: 1e-6,
            max_iter: 300,
            tol: 1e-3,
            alpha_init: None,
            lambda_init: None,
            update_precisions: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesianRidgeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Noise precision.
    pub alpha: f64,
    /// Weight precision.
    pub lambda: f64,
    pub n_iterations: usize,
    pub converged: bool,
    /// Column means of the training design.
    pub x_mean: Vec<f64>,
    /// Posterior covariance `V diag(scales) Vᵀ`; `V` row-major `d × d`,
    /// column `j` being eigenvector `j`.
    pub posterior_vectors: Vec<f64>,
    pub posterior_scales: Vec<f64>,
}

impl BayesianRidgeModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    pub fn predict_one(&self, x: &[f64]) -> f64 {
        self.intercept + x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>()
    }

    /// Predictive standard deviation `sqrt(1/α + zᵀΣz)`, `z = x − x̄`.
    pub fn predict_std_one(&self, x: &[f64]) -> f64 {
        let d = self.n_features();
        let mut quad = 0.0;
        for j in 0..d {
            let proj: f64 = (0..d)
                .map(|i| self.posterior_vectors[i * d + j] * (x[i] - self.x_mean[i]))
                .sum();
            quad += self.posterior_scales[j] * proj * proj;
        }
        (1.0 / self.alpha + quad).sqrt()
    }
}

pub fn fit_bayesian_ridge(
    x: &[f64],
    n_features: usize,
    y: &[f64],
    config: &BayesianRidgeConfig,
) -> Result<BayesianRidgeModel> {
    let n = y.len();
    if n == 0 {
        return Err(Error::EmptyTraining);
    }
    let d = n_features;
    if x.len() != n * d {
        return Err(Error::Shape(format!("design has {} values for {n} rows × {d} features", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in training data".into()));
    }

    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut x_mean = vec![0.0; d];
    for row in x.chunks_exact(d) {
        for (m, v) in x_mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    x_mean.iter_mut().for_each(|m| *m /= nf);

    // Gram matrix and Xᵀy of the centered data
    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut xty = DVector::<f64>::zeros(d);
    let mut z = vec![0.0; d];
    for (row, &yi) in x.chunks_exact(d).zip(y) {
        for j in 0..d {
            z[j] = row[j] - x_mean[j];
        }
        let yc = yi - y_mean;
        for i in 0..d {
            xty[i] += z[i] * yc;
            for j in 0..=i {
                gram[(i, j)] += z[i] * z[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            gram[(j, i)] = gram[(i, j)];
        }
    }

    let eig = SymmetricEigen::new(gram);
    let eigvals: Vec<f64> = eig.eigenvalues.iter().map(|&s| s.max(0.0)).collect();
    let vectors = eig.eigenvectors;
    let proj_xty = vectors.transpose() * &xty;

    let var_y = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / nf;
    let mut alpha = config
        .alpha_init
        .unwrap_or(if var_y > 0.0 { 1.0 / var_y } else { 1.0 });
    let mut lambda = config.lambda_init.unwrap_or(1.0);
    if !(alpha > 0.0 && lambda > 0.0 && alpha.is_finite() && lambda.is_finite()) {
        return Err(Error::Numeric(format!("invalid initial precisions α={alpha}, λ={lambda}")));
    }

    let solve = |alpha: f64, lambda: f64| -> Vec<f64> {
        let coef: Vec<f64> = (0..d)
            .map(|k| alpha * proj_xty[k] / (alpha * eigvals[k] + lambda))
            .collect();
        (0..d)
            .map(|i| (0..d).map(|k| vectors[(i, k)] * coef[k]).sum())
            .collect()
    };

    let mut w_old: Option<Vec<f64>> = None;
    let mut converged = false;
    let mut n_iterations = 0;
    for iter in 0..config.max_iter.max(1) {
        n_iterations = iter + 1;
        let w = solve(alpha, lambda);

        if config.update_precisions {
            let mut rss = 0.0;
            for (row, &yi) in x.chunks_exact(d).zip(y) {
                let fit: f64 = (0..d).map(|j| (row[j] - x_mean[j]) * w[j]).sum();
                rss += (yi - y_mean - fit).powi(2);
            }
            let gamma: f64 = eigvals.iter().map(|&s| alpha * s / (lambda + alpha * s)).sum();
            let w_sq: f64 = w.iter().map(|v| v * v).sum();
            lambda = (gamma + 2.0 * config.lambda_1) / (w_sq + 2.0 * config.lambda_2);
            alpha = (nf - gamma + 2.0 * config.alpha_1) / (rss + 2.0 * config.alpha_2);
            if !(alpha.is_finite() && lambda.is_finite() && alpha > 0.0 && lambda > 0.0) {
                return Err(Error::Numeric(format!(
                    "precision update left α={alpha}, λ={lambda} at iteration {iter}"
                )));
            }
        }

        if let Some(prev) = &w_old {
            let change = prev
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if change < config.tol {
                converged = true;
                break;
            }
        }
        w_old = Some(w);
    }

    let weights = solve(alpha, lambda);
    let intercept = y_mean - x_mean.iter().zip(&weights).map(|(m, w)| m * w).sum::<f64>();
    let mut posterior_vectors = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            posterior_vectors[i * d + j] = vectors[(i, j)];
        }
    }
    let posterior_scales = eigvals.iter().map(|&s| 1.0 / (alpha * s + lambda)).collect();

    Ok(BayesianRidgeModel {
        weights,
        intercept,
        alpha,
        lambda,
        n_iterations,
        converged,
        x_mean,
        posterior_vectors,
        posterior_scales,
    })
}

/// Posterior predictive mean and, when requested, standard deviation.
pub fn predict_bayesian_ridge(
    model: &BayesianRidgeModel,
    x: &[f64],
    n_features: usize,
    with_std: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if n_features != model.n_features() || !x.len().is_multiple_of(n_features.max(1)) {
        return Err(Error::Shape(format!(
            "model expects {} features, got rows of {n_features}",
            model.n_features()
        )));
    }
    let mean = x.chunks_exact(n_features).map(|r| model.predict_one(r)).collect();
    let std = with_std.then(|| x.chunks_exact(n_features).map(|r| model.predict_std_one(r)).collect());
    Ok((mean, std))
}
