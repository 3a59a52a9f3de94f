//! ν-one-class SVM with an RBF kernel, used as the anomaly detector over
//! trigger feature vectors.
//!
//! Solves the Schölkopf dual
//!
//! ```text
//!   min ½ Σᵢⱼ αᵢαⱼ K(xᵢ,xⱼ)   s.t.  0 ≤ αᵢ ≤ 1/(νn),  Σαᵢ = 1
//! ```
//!
//! by two-coordinate descent on the maximal-violating pair (the classic SMO
//! working-set rule): raise the α with the smallest gradient among those
//! below the box, lower the one with the largest gradient among those above
//! zero, until the gap closes to `tol`. Coordinates that reach a bound are
//! snapped to it exactly, so support-vector and free-vector sets are crisp.
//!
//! Features are z-score standardized before the kernel (population σ;
//! constant dimensions get σ = 1). The offset ρ is taken as the minimum
//! decision sum over free support vectors, evaluated through the same code
//! path `predict` uses — a query identical to a boundary training point
//! therefore scores exactly 0.0 and lands on the inlier side. Everything is
//! sequential and seed-free, so a fit is bit-reproducible for a given input
//! order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;

pub const DIM: usize = FeatureVector::DIM;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("need at least 2 training vectors, got {0}")]
    TooFewVectors(usize),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("degenerate training set: n*nu = {product} < 1 (n = {n}, nu = {nu})")]
    DegenerateData { n: usize, nu: f64, product: f64 },
    #[error("solver did not converge within {iterations} iterations (KKT violation {violation:.3e})")]
    NonConvergence { iterations: usize, violation: f64 },
}

/// Per-dimension standardization fitted on the training set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scaling {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaling {
    fn fit(raw: &[[f64; DIM]]) -> Scaling {
        let n = raw.len() as f64;
        let mut mean = vec![0.0; DIM];
        let mut std = vec![1.0; DIM];
        for d in 0..DIM {
            let lo = raw.iter().map(|x| x[d]).fold(f64::INFINITY, f64::min);
            let hi = raw.iter().map(|x| x[d]).fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                // Constant dimension: center on the constant, keep σ = 1.
                mean[d] = lo;
                continue;
            }
            let mu = raw.iter().map(|x| x[d]).sum::<f64>() / n;
            let var = raw.iter().map(|x| (x[d] - mu) * (x[d] - mu)).sum::<f64>() / n;
            mean[d] = mu;
            std[d] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Scaling { mean, std }
    }

    fn apply(&self, x: [f64; DIM]) -> [f64; DIM] {
        let mut out = [0.0; DIM];
        for d in 0..DIM {
            out[d] = (x[d] - self.mean[d]) / self.std[d];
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub nu: f64,
    pub gamma: f64,
    pub rho: f64,
    pub scaling: Scaling,
    /// Support vectors in scaled feature space.
    pub svs: Vec<Vec<f64>>,
    /// Dual coefficients of the support vectors, in the same order.
    pub alphas: Vec<f64>,
}

fn sqdist(u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for d in 0..u.len().min(v.len()) {
        let diff = u[d] - v[d];
        acc += diff * diff;
    }
    acc
}

fn rbf(gamma: f64, u: &[f64], v: &[f64]) -> f64 {
    (-gamma * sqdist(u, v)).exp()
}

/// Σ αᵢ K(svᵢ, x) in stored order — the one summation used for training-time
/// ρ and for predictions, so the two agree bitwise.
fn decision_sum(svs: &[Vec<f64>], alphas: &[f64], gamma: f64, x: &[f64]) -> f64 {
    svs.iter().zip(alphas).map(|(sv, a)| a * rbf(gamma, sv, x)).sum()
}

impl SvmModel {
    /// Decision score and outlier verdict for one query. Negative scores are
    /// outliers; the boundary itself (score 0) is an inlier.
    pub fn predict(&self, v: &FeatureVector) -> (f64, bool) {
        let x = self.scaling.apply(v.as_array());
        let score = decision_sum(&self.svs, &self.alphas, self.gamma, &x) - self.rho;
        (score, score < 0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<SvmModel, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub nu: f64,
    /// Kernel width; `None` picks 1/DIM, the variance heuristic after
    /// standardization.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { nu: 0.05, gamma: None, tol: 1e-4, max_iter: 100_000 }
    }
}

/// Solver telemetry for tests and diagnostics.
#[derive(Debug, Clone)]
pub struct FitDiag {
    /// Final dual coefficients for the full training set (zeros included).
    pub alphas: Vec<f64>,
    pub iterations: usize,
    /// Final maximal KKT violation (≤ tol iff converged).
    pub kkt_violation: f64,
    /// Box bound 1/(νn).
    pub c: f64,
}

pub fn fit(vectors: &[FeatureVector], cfg: &FitConfig) -> Result<SvmModel, SvmError> {
    fit_with_diag(vectors, cfg).map(|(m, _)| m)
}

pub fn fit_with_diag(
    vectors: &[FeatureVector],
    cfg: &FitConfig,
) -> Result<(SvmModel, FitDiag), SvmError> {
    let n = vectors.len();
    if n < 2 {
        return Err(SvmError::TooFewVectors(n));
    }
    if !(cfg.nu > 0.0 && cfg.nu <= 1.0) {
        return Err(SvmError::InvalidParam(format!("nu must be in (0, 1], got {}", cfg.nu)));
    }
    if let Some(g) = cfg.gamma {
        if !(g > 0.0) {
            return Err(SvmError::InvalidParam(format!("gamma must be positive, got {g}")));
        }
    }
    if !(cfg.tol > 0.0) {
        return Err(SvmError::InvalidParam(format!("tol must be positive, got {}", cfg.tol)));
    }
    let product = n as f64 * cfg.nu;
    if product < 1.0 {
        return Err(SvmError::DegenerateData { n, nu: cfg.nu, product });
    }

    let raw: Vec<[f64; DIM]> = vectors.iter().map(FeatureVector::as_array).collect();
    let scaling = Scaling::fit(&raw);
    let x: Vec<[f64; DIM]> = raw.into_iter().map(|v| scaling.apply(v)).collect();
    let gamma = cfg.gamma.unwrap_or(1.0 / DIM as f64);
    let c = 1.0 / (cfg.nu * n as f64);

    // Dense kernel matrix; corpus-scale n keeps this comfortably in memory.
    let mut k = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in (i + 1)..n {
            let v = rbf(gamma, &x[i], &x[j]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }

    let mut alpha = vec![1.0 / n as f64; n];
    // Gradient of the objective: g = Kα.
    let mut g: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| k[i][j] * alpha[j]).sum())
        .collect();

    let select = |alpha: &[f64], g: &[f64]| -> Option<(usize, usize, f64)> {
        let mut up: Option<usize> = None; // argmin g over α < C
        let mut down: Option<usize> = None; // argmax g over α > 0
        for t in 0..n {
            if alpha[t] < c && up.map(|u| g[t] < g[u]).unwrap_or(true) {
                up = Some(t);
            }
            if alpha[t] > 0.0 && down.map(|d| g[t] > g[d]).unwrap_or(true) {
                down = Some(t);
            }
        }
        match (up, down) {
            (Some(i), Some(j)) => Some((i, j, g[j] - g[i])),
            _ => None, // every α at a bound in the same direction: nothing can move
        }
    };

    let mut iterations = 0;
    let mut violation = select(&alpha, &g).map(|(_, _, v)| v).unwrap_or(0.0);
    let converged = loop {
        let Some((i, j, viol)) = select(&alpha, &g) else { break true };
        violation = viol;
        if violation <= cfg.tol {
            break true;
        }
        if iterations >= cfg.max_iter {
            break false;
        }
        iterations += 1;

        let eta = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(1e-12);
        let headroom_i = c - alpha[i];
        let step = (violation / eta).min(headroom_i).min(alpha[j]);
        // Snap to the box exactly when the step is bound-limited.
        alpha[i] = if step == headroom_i { c } else { alpha[i] + step };
        alpha[j] = if step == alpha[j] { 0.0 } else { alpha[j] - step };
        for t in 0..n {
            g[t] += step * (k[i][t] - k[j][t]);
        }
    };
    if !converged {
        return Err(SvmError::NonConvergence { iterations, violation });
    }

    let sv_idx: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
    let svs: Vec<Vec<f64>> = sv_idx.iter().map(|&i| x[i].to_vec()).collect();
    let sv_alphas: Vec<f64> = sv_idx.iter().map(|&i| alpha[i]).collect();

    // ρ from KKT: free vectors sit on the boundary. Evaluate them through
    // the predict-path sum (not the incrementally maintained gradient) and
    // take the minimum, so every free vector scores ≥ 0 as a query. Without
    // free vectors, bracket ρ between the at-bound groups.
    let free: Vec<usize> =
        (0..n).filter(|&i| alpha[i] > 0.0 && alpha[i] < c).collect();
    let fresh = |i: usize| decision_sum(&svs, &sv_alphas, gamma, &x[i]);
    let rho = if !free.is_empty() {
        free.iter().map(|&i| fresh(i)).fold(f64::INFINITY, f64::min)
    } else {
        let hi = (0..n)
            .filter(|&i| alpha[i] < c)
            .map(fresh)
            .fold(f64::INFINITY, f64::min);
        let lo = (0..n)
            .filter(|&i| alpha[i] > 0.0)
            .map(fresh)
            .fold(f64::NEG_INFINITY, f64::max);
        if hi.is_finite() {
            0.5 * (hi + lo)
        } else {
            lo
        }
    };

    let model = SvmModel { nu: cfg.nu, gamma, rho, scaling, svs, alphas: sv_alphas };
    let diag =
        FitDiag { alphas: alpha, iterations, kkt_violation: violation.max(0.0), c };
    Ok((model, diag))
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
}

/// k-fold cross-validation: folds are a seeded shuffle, each fold is held
/// out once, and accuracy is the held-out fraction predicted inlier (the
/// training data is all one class).
pub fn cross_validate(
    vectors: &[FeatureVector],
    cfg: &FitConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport, SvmError> {
    let n = vectors.len();
    if k < 2 {
        return Err(SvmError::InvalidParam(format!("fold count must be at least 2, got {k}")));
    }
    if n < k {
        return Err(SvmError::InvalidParam(format!(
            "fold count {k} exceeds the {n} available vectors"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut fold_accuracies = Vec::with_capacity(k);
    for f in 0..k {
        let lo = f * n / k;
        let hi = (f + 1) * n / k;
        let held: Vec<usize> = order[lo..hi].to_vec();
        let train: Vec<FeatureVector> = order[..lo]
            .iter()
            .chain(&order[hi..])
            .map(|&i| vectors[i])
            .collect();
        let model = fit(&train, cfg)?;
        let inliers =
            held.iter().filter(|&&i| !model.predict(&vectors[i]).1).count();
        fold_accuracies.push(inliers as f64 / held.len() as f64);
    }
    let mean = fold_accuracies.iter().sum::<f64>() / k as f64;
    Ok(CvReport { fold_accuracies, mean })
}
