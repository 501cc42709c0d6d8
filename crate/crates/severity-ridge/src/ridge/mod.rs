//! Bayesian ridge regression fitted by evidence maximization.
//!
//! The model is standard Bayesian linear regression with a Gaussian prior of
//! precision `lambda` over the coefficients and Gaussian noise of precision
//! `alpha`, both carrying Gamma hyperpriors. `fit` alternates a posterior
//! solve with closed-form hyperparameter updates that maximize the marginal
//! likelihood (type-II maximum likelihood), recording the log evidence per
//! iteration.
//!
//! Internally `fit` centers (when fitting an intercept) and scales each
//! column by its population standard deviation; coefficients are unscaled
//! before they are returned, so the public model always lives in original
//! feature units. Constant columns are left unscaled and end up with
//! coefficient zero.

mod persist;
mod stratified;

pub use persist::{load_model, save_model};
pub use stratified::{fit_stratified, StratifiedModel, DEFAULT_AGE_CUTOFFS};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct RidgeConfig {
    /// Shape of the Gamma hyperprior over the noise precision alpha.
    pub alpha_1: f64,
    /// Rate of the Gamma hyperprior over alpha.
    pub alpha_2: f64,
    /// Shape of the Gamma hyperprior over the coefficient precision lambda.
    pub lambda_1: f64,
    /// Rate of the Gamma hyperprior over lambda.
    pub lambda_2: f64,
    /// Starting alpha; defaults to 1/Var(y) (1 if Var(y) = 0).
    pub alpha_init: Option<f64>,
    /// Starting lambda; defaults to 1.
    pub lambda_init: Option<f64>,
    /// Stop when the L1 change in coefficients between iterations drops
    /// below this.
    pub tol: f64,
    /// Iteration cap for the hyperparameter loop.
    pub max_iter: usize,
    /// Center the data and report an intercept.
    pub fit_intercept: bool,
    /// When off, alpha and lambda stay fixed and `fit` reduces to a single
    /// penalized least-squares solve.
    pub update_hyperparams: bool,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        Self {
            alpha_1: 2.0,
            alpha_2: 0.01,
            lambda_1: 0.001,
            lambda_2: 0.01,
            alpha_init: None,
            lambda_init: None,
            tol: 1e-3,
            max_iter: 300,
            fit_intercept: true,
            update_hyperparams: true,
        }
    }
}

impl RidgeConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_1", self.alpha_1),
            ("alpha_2", self.alpha_2),
            ("lambda_1", self.lambda_1),
            ("lambda_2", self.lambda_2),
            ("tol", self.tol),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::OutOfRange {
                    what: name,
                    got: v.to_string(),
                    expected: "finite and > 0",
                });
            }
        }
        for (name, v) in [
            ("alpha_init", self.alpha_init),
            ("lambda_init", self.lambda_init),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::OutOfRange {
                        what: name,
                        got: v.to_string(),
                        expected: "finite and > 0",
                    });
                }
            }
        }
        if self.max_iter == 0 {
            return Err(Error::OutOfRange {
                what: "max_iter",
                got: "0".to_string(),
                expected: ">= 1",
            });
        }
        Ok(())
    }
}

/// A fitted model. Coefficients, covariance, and feature means are all in
/// original (unscaled) feature units.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeModel {
    coefficients: Vec<f64>,
    intercept: f64,
    alpha: f64,
    lambda: f64,
    posterior_covariance: Matrix,
    feature_means: Vec<f64>,
    effective_dof: f64,
    n_iter: usize,
    converged: bool,
    log_evidence_trace: Vec<f64>,
    config: RidgeConfig,
}

impl RidgeModel {
    pub fn p(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// Noise precision.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Coefficient-prior precision.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn posterior_covariance(&self) -> &Matrix {
        &self.posterior_covariance
    }

    /// Training-column means (all zeros when the model was fitted without an
    /// intercept); predictions with uncertainty re-center against these.
    pub fn feature_means(&self) -> &[f64] {
        &self.feature_means
    }

    /// Effective degrees of freedom gamma, in [0, p].
    pub fn effective_dof(&self) -> f64 {
        self.effective_dof
    }

    pub fn n_iter(&self) -> usize {
        self.n_iter
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn log_evidence_trace(&self) -> &[f64] {
        &self.log_evidence_trace
    }

    pub fn config(&self) -> &RidgeConfig {
        &self.config
    }

    /// Reassembles a model from stored fields, enforcing the type
    /// invariants. Used by persistence.
    pub(crate) fn from_parts(
        coefficients: Vec<f64>,
        intercept: f64,
        alpha: f64,
        lambda: f64,
        posterior_covariance: Matrix,
        feature_means: Vec<f64>,
        effective_dof: f64,
        n_iter: usize,
        converged: bool,
        log_evidence_trace: Vec<f64>,
        config: RidgeConfig,
    ) -> Result<Self> {
        let p = coefficients.len();
        if p == 0 {
            return Err(Error::invalid("model needs at least one coefficient"));
        }
        if feature_means.len() != p {
            return Err(Error::invalid(format!(
                "feature means length {} does not match p = {}",
                feature_means.len(),
                p
            )));
        }
        if posterior_covariance.nrows() != p || posterior_covariance.ncols() != p {
            return Err(Error::invalid(format!(
                "posterior covariance is {}x{}, expected {p}x{p}",
                posterior_covariance.nrows(),
                posterior_covariance.ncols()
            )));
        }
        if !alpha.is_finite() || alpha <= 0.0 || !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::invalid(format!(
                "precisions must be finite and positive, got alpha = {alpha}, lambda = {lambda}"
            )));
        }
        if !(0.0..=p as f64).contains(&effective_dof) {
            return Err(Error::invalid(format!(
                "effective dof {effective_dof} outside [0, {p}]"
            )));
        }
        if !intercept.is_finite()
            || coefficients.iter().any(|v| !v.is_finite())
            || feature_means.iter().any(|v| !v.is_finite())
            || !posterior_covariance.is_finite()
        {
            return Err(Error::invalid("model fields must all be finite"));
        }
        config.validate()?;
        Ok(Self {
            coefficients,
            intercept,
            alpha,
            lambda,
            posterior_covariance,
            feature_means,
            effective_dof,
            n_iter,
            converged,
            log_evidence_trace,
            config,
        })
    }
}

fn validate_data(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::invalid("design matrix must be non-empty"));
    }
    if y.len() != x.nrows() {
        return Err(Error::invalid(format!(
            "target length {} does not match design row count {}",
            y.len(),
            x.nrows()
        )));
    }
    if !x.is_finite() {
        return Err(Error::invalid("design matrix contains non-finite values"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target contains non-finite values"));
    }
    Ok(())
}

fn check_precision(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::OutOfRange {
            what: name,
            got: v.to_string(),
            expected: "finite and > 0",
        });
    }
    Ok(())
}

/// Posterior of the coefficients at fixed precisions:
/// `Sigma = (lambda I + alpha X^T X)^-1`, `mu = alpha Sigma X^T y`.
/// Equivalent to ridge regression with penalty lambda/alpha. No centering or
/// scaling happens here; inputs are taken as-is.
pub fn solve_posterior(
    x: &Matrix,
    y: &[f64],
    alpha: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Matrix)> {
    validate_data(x, y)?;
    check_precision("alpha", alpha)?;
    check_precision("lambda", lambda)?;
    let xtx = x.gram();
    let xty = x.mul_transpose_vec(y);
    let (mu, sigma, _) = posterior_from_gram(&xtx, &xty, alpha, lambda)?;
    Ok((mu, sigma))
}

/// Shared posterior solve on precomputed sufficient statistics. Returns
/// (mu, Sigma, ln det A) with A = lambda I + alpha X^T X.
fn posterior_from_gram(
    xtx: &Matrix,
    xty: &[f64],
    alpha: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Matrix, f64)> {
    let p = xtx.nrows();
    let mut a = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            let mut v = alpha * xtx.get(i, j);
            if i == j {
                v += lambda;
            }
            a.set(i, j, v);
        }
    }
    let chol = cholesky(&a)?;
    let sigma = chol.inverse();
    let mut mu = chol.solve(xty);
    for m in &mut mu {
        *m *= alpha;
    }
    Ok((mu, sigma, chol.log_det()))
}

fn population_variance(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// v^T A v for symmetric A.
fn quad_form(a: &Matrix, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..v.len() {
        acc += v[i] * dot(a.row(i), v);
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn log_evidence(
    n: usize,
    p: usize,
    alpha: f64,
    lambda: f64,
    rss: f64,
    mu_sq: f64,
    log_det_a: f64,
    config: &RidgeConfig,
) -> f64 {
    let nf = n as f64;
    let pf = p as f64;
    0.5 * (pf * lambda.ln() + nf * alpha.ln()
        - alpha * rss
        - lambda * mu_sq
        - log_det_a
        - nf * (2.0 * std::f64::consts::PI).ln())
        + (config.alpha_1 * alpha.ln() - config.alpha_2 * alpha)
        + (config.lambda_1 * lambda.ln() - config.lambda_2 * lambda)
}

/// Fits the model.
///
/// With `update_hyperparams` on, iterates: posterior solve; effective dof
/// `gamma = p - lambda tr(Sigma)`; `lambda <- (gamma + 2 lambda_1) /
/// (||mu||^2 + 2 lambda_2)`; `alpha <- (n - gamma + 2 alpha_1) /
/// (rss + 2 alpha_2)`; stops when the L1 coefficient change falls below
/// `tol` or `max_iter` is reached, then refreshes the posterior at the final
/// precisions. With it off, performs exactly one solve at the fixed
/// precisions.
pub fn fit(x: &Matrix, y: &[f64], config: &RidgeConfig) -> Result<RidgeModel> {
    config.validate()?;
    validate_data(x, y)?;
    let n = x.nrows();
    let p = x.ncols();

    // Standardization: center when fitting an intercept, scale every
    // non-constant column by its population standard deviation.
    let col_means: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let scales: Vec<f64> = (0..p)
        .map(|j| {
            let var = (0..n)
                .map(|i| {
                    let d = x.get(i, j) - col_means[j];
                    d * d
                })
                .sum::<f64>()
                / n as f64;
            let s = var.sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let feature_means = if config.fit_intercept {
        col_means.clone()
    } else {
        vec![0.0; p]
    };
    let mut xs = Matrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            let mut v = x.get(i, j);
            if config.fit_intercept {
                v -= col_means[j];
            }
            xs.set(i, j, v / scales[j]);
        }
    }
    let y_mean = if config.fit_intercept {
        y.iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    let ys: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // Sufficient statistics; the iteration never touches the data again.
    let xtx = xs.gram();
    let xty = xs.mul_transpose_vec(&ys);
    let yty = dot(&ys, &ys);

    let var_y = population_variance(y);
    let mut alpha = config.alpha_init.unwrap_or(if var_y > 0.0 {
        1.0 / var_y
    } else {
        1.0
    });
    let mut lambda = config.lambda_init.unwrap_or(1.0);

    let mut trace = Vec::new();
    let mut n_iter = 0usize;
    let mut converged = false;
    let mut prev_mu: Option<Vec<f64>> = None;

    if config.update_hyperparams {
        for _ in 0..config.max_iter {
            n_iter += 1;
            let (mu, sigma, log_det_a) = posterior_from_gram(&xtx, &xty, alpha, lambda)?;
            // rss via the Gram identity; clamped because cancellation can
            // push an exact-fit residual a hair below zero.
            let rss = (yty - 2.0 * dot(&mu, &xty) + quad_form(&xtx, &mu)).max(0.0);
            let mu_sq = dot(&mu, &mu);
            trace.push(log_evidence(n, p, alpha, lambda, rss, mu_sq, log_det_a, config));
            let gamma = (p as f64 - lambda * sigma.trace()).clamp(0.0, p as f64);
            lambda = (gamma + 2.0 * config.lambda_1) / (mu_sq + 2.0 * config.lambda_2);
            alpha = (n as f64 - gamma + 2.0 * config.alpha_1) / (rss + 2.0 * config.alpha_2);
            if let Some(prev) = &prev_mu {
                let l1: f64 = mu.iter().zip(prev).map(|(a, b)| (a - b).abs()).sum();
                if l1 < config.tol {
                    converged = true;
                    break;
                }
            }
            prev_mu = Some(mu);
        }
    }

    // Posterior at the final precisions (the only solve when updates are
    // off).
    let (mu, sigma, log_det_a) = posterior_from_gram(&xtx, &xty, alpha, lambda)?;
    if !config.update_hyperparams {
        n_iter = 1;
        converged = true;
        let rss = (yty - 2.0 * dot(&mu, &xty) + quad_form(&xtx, &mu)).max(0.0);
        let mu_sq = dot(&mu, &mu);
        trace.push(log_evidence(n, p, alpha, lambda, rss, mu_sq, log_det_a, config));
    }
    let gamma = (p as f64 - lambda * sigma.trace()).clamp(0.0, p as f64);

    // Back to original units.
    let coefficients: Vec<f64> = mu.iter().zip(&scales).map(|(m, s)| m / s).collect();
    let mut cov = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            cov.set(i, j, sigma.get(i, j) / (scales[i] * scales[j]));
        }
    }
    let intercept = if config.fit_intercept {
        y_mean - dot(&feature_means, &coefficients)
    } else {
        0.0
    };

    Ok(RidgeModel {
        coefficients,
        intercept,
        alpha,
        lambda,
        posterior_covariance: cov,
        feature_means,
        effective_dof: gamma,
        n_iter,
        converged,
        log_evidence_trace: trace,
        config: config.clone(),
    })
}

fn check_predict_dims(model: &RidgeModel, x: &Matrix) -> Result<()> {
    if x.ncols() != model.p() {
        return Err(Error::invalid(format!(
            "input has {} columns but model expects {}",
            x.ncols(),
            model.p()
        )));
    }
    Ok(())
}

#[inline]
fn predict_row(model: &RidgeModel, row: &[f64]) -> f64 {
    model.intercept + dot(&model.coefficients, row)
}

/// Point predictions: `X w + intercept` per row.
pub fn predict(model: &RidgeModel, x: &Matrix) -> Result<Vec<f64>> {
    check_predict_dims(model, x)?;
    Ok((0..x.nrows()).map(|i| predict_row(model, x.row(i))).collect())
}

/// Point prediction for a single feature row.
pub fn predict_one(model: &RidgeModel, features: &[f64]) -> Result<f64> {
    if features.len() != model.p() {
        return Err(Error::invalid(format!(
            "input has {} features but model expects {}",
            features.len(),
            model.p()
        )));
    }
    Ok(predict_row(model, features))
}

/// Predictions with predictive standard deviations. Per row:
/// variance = 1/alpha + d^T Sigma d with d the row re-centered by the
/// training feature means.
pub fn predict_with_std(model: &RidgeModel, x: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
    check_predict_dims(model, x)?;
    let mut means = Vec::with_capacity(x.nrows());
    let mut stds = Vec::with_capacity(x.nrows());
    let noise_var = 1.0 / model.alpha;
    let mut d = vec![0.0; model.p()];
    for i in 0..x.nrows() {
        let row = x.row(i);
        means.push(predict_row(model, row));
        for (dj, (rj, mj)) in d.iter_mut().zip(row.iter().zip(&model.feature_means)) {
            *dj = rj - mj;
        }
        // the quadratic form is nonnegative up to roundoff; clamp so the
        // noise floor sqrt(1/alpha) is a true lower bound
        let q = quad_form(&model.posterior_covariance, &d).max(0.0);
        stds.push((noise_var + q).sqrt());
    }
    Ok((means, stds))
}
