//! Binary iterative hard thresholding and its partial-support variants.
//!
//! All algorithms share one iteration loop: a gradient step toward sign
//! consistency followed by a variant-specific thresholding rule. Only the
//! rule differs, which is what makes the reduction identities between the
//! variants hold bit for bit.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::signal_model::{check_unit_interval, Matrix};

/// Step size, iteration cap and halting tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub tau: f64,
    pub max_iters: usize,
    /// Halt once the Euclidean norm of the change between successive
    /// (unnormalized) iterates drops below this value.
    pub tol: f64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self { tau: 1e-3, max_iters: 1000, tol: 1e-10 }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau.is_nan() || self.tau <= 0.0 {
            return invalid(format!("tau must be positive, got {}", self.tau));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return invalid(format!("tol must be non-negative, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return invalid("max_iters must be at least 1");
        }
        Ok(())
    }
}

/// Per-coordinate weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(bad) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return invalid(format!("weights must lie in [0, 1], found {bad}"));
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Output of a recovery run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    /// Unit-norm estimate, or the zero vector when `degenerate` is set.
    pub estimate: Vec<f64>,
    pub iterations: usize,
    /// Halted by the tolerance rather than the iteration cap.
    pub converged: bool,
    /// `sign(matrix * estimate) == y` elementwise.
    pub consistent: bool,
    /// The final iterate was all zero and could not be normalized.
    pub degenerate: bool,
}

/// Indices of the `k` entries of `scores` with largest magnitude, returned in
/// ascending order. Equal magnitudes go to the lower index.
pub fn top_k_indices(scores: &[f64], k: usize) -> Vec<usize> {
    let by_magnitude = |&a: &usize, &b: &usize| -> Ordering {
        scores[b].abs().total_cmp(&scores[a].abs()).then(a.cmp(&b))
    };
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    if k == 0 {
        return Vec::new();
    }
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, by_magnitude);
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

/// Keep the `k` largest-magnitude entries of `z` and zero the rest.
pub fn prune(z: &[f64], k: usize) -> Result<Vec<f64>> {
    if k > z.len() {
        return invalid(format!("cannot keep {k} entries of a length-{} vector", z.len()));
    }
    Ok(keep_only(z, &top_k_indices(z, k)))
}

fn keep_only(z: &[f64], keep: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    for &i in keep {
        out[i] = z[i];
    }
    out
}

/// Indices of the nonzero entries of `x`.
pub fn support_of(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] != 0.0).collect()
}

fn check_measurements(matrix: &Matrix, y: &[f64]) -> Result<()> {
    matrix.check_rows(y.len(), "measurement vector")?;
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return invalid(format!("measurements must be +1 or -1, found {bad}"));
    }
    Ok(())
}

fn check_sparsity(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return invalid(format!("sparsity must satisfy 1 <= k <= n, got k = {k}, n = {n}"));
    }
    Ok(())
}

fn check_indices(indices: &[usize], n: usize) -> Result<()> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return invalid(format!("support index {bad} out of range for n = {n}"));
    }
    Ok(())
}

fn mask_of(indices: &[usize], n: usize) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in indices {
        mask[i] = true;
    }
    mask
}

/// Gradient step `x + (tau/2) * A^T (y - sign(A x))`.
///
/// Only rows whose sign disagrees with `y` contribute; when every sign
/// agrees `x` is returned unchanged.
fn gradient_step(x: &[f64], matrix: &Matrix, y: &[f64], tau: f64) -> Vec<f64> {
    let signs = matrix.sign_product(x);
    let mut grad = vec![0.0; x.len()];
    let mut any = false;
    for (i, (&yi, &si)) in y.iter().zip(&signs).enumerate() {
        let r = yi - si;
        if r != 0.0 {
            any = true;
            for (g, &a) in grad.iter_mut().zip(matrix.row(i)) {
                *g += a * r;
            }
        }
    }
    if !any {
        return x.to_vec();
    }
    let half = tau / 2.0;
    x.iter().zip(&grad).map(|(&xi, &gi)| xi + half * gi).collect()
}

/// One BIHT gradient step.
pub fn biht_step(x: &[f64], matrix: &Matrix, y: &[f64], tau: f64) -> Result<Vec<f64>> {
    matrix.check_cols(x.len(), "iterate")?;
    check_measurements(matrix, y)?;
    if tau.is_nan() || tau < 0.0 {
        return invalid(format!("tau must be non-negative, got {tau}"));
    }
    Ok(gradient_step(x, matrix, y, tau))
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn iterate<F>(matrix: &Matrix, y: &[f64], cfg: &RecoveryConfig, mut threshold: F) -> RecoveryResult
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut x = vec![0.0; matrix.cols()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        let gamma = gradient_step(&x, matrix, y, cfg.tau);
        let next = threshold(&gamma);
        iterations += 1;
        let change = x.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        x = next;
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    finish(matrix, y, x, iterations, converged)
}

fn finish(matrix: &Matrix, y: &[f64], mut x: Vec<f64>, iterations: usize, converged: bool) -> RecoveryResult {
    let norm = norm2(&x);
    let degenerate = norm == 0.0;
    if degenerate {
        x.iter_mut().for_each(|v| *v = 0.0);
    } else {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    let consistent = matrix.sign_product(&x) == y;
    RecoveryResult {
        estimate: x,
        iterations,
        converged: converged && !degenerate,
        consistent,
        degenerate,
    }
}

/// Standard BIHT: gradient step, then keep the `k` largest entries.
pub fn biht(matrix: &Matrix, y: &[f64], k: usize, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    cfg.validate()?;
    check_measurements(matrix, y)?;
    check_sparsity(k, matrix.cols())?;
    Ok(iterate(matrix, y, cfg, |g| keep_only(g, &top_k_indices(g, k))))
}

/// Oracle thresholding rule: entries in the estimate are kept, all others
/// are multiplied by `c` (`c = 0` zeroes them).
fn oracle_threshold(g: &[f64], mask: &[bool], c: f64) -> Vec<f64> {
    g.iter()
        .zip(mask)
        .map(|(&v, &inside)| match (inside, c == 0.0) {
            (true, _) => v,
            (false, true) => 0.0,
            (false, false) => c * v,
        })
        .collect()
}

/// BIHT with a trusted support estimate. Every entry of `estimate` is kept,
/// entries off it are scaled by `c` each iteration.
pub fn biht_oracle(
    matrix: &Matrix,
    y: &[f64],
    estimate: &[usize],
    c: f64,
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    check_measurements(matrix, y)?;
    if estimate.is_empty() {
        return invalid("oracle thresholding needs a nonempty support estimate");
    }
    check_indices(estimate, matrix.cols())?;
    if !(0.0..1.0).contains(&c) {
        return invalid(format!("soft constant must lie in [0, 1), got {c}"));
    }
    let mask = mask_of(estimate, matrix.cols());
    Ok(iterate(matrix, y, cfg, |g| oracle_threshold(g, &mask, c)))
}

/// Four-case weighting against the estimate and the current top-k set:
/// 1 on the estimate, `1 - rho` on top-k entries outside it, 0 elsewhere.
fn fourset_threshold(g: &[f64], mask: &[bool], k: usize, rho: f64) -> Vec<f64> {
    let mut top = vec![false; g.len()];
    for i in top_k_indices(g, k) {
        top[i] = true;
    }
    let off_weight = 1.0 - rho;
    g.iter()
        .zip(mask.iter().zip(&top))
        .map(|(&v, (&inside, &large))| match (inside, large) {
            (true, _) => v,
            (false, true) => v * off_weight,
            (false, false) => 0.0,
        })
        .collect()
}

/// Soft thresholding with a support estimate of accuracy `rho`. The output
/// may carry up to `|estimate| + k` nonzeros.
pub fn biht_fourset(
    matrix: &Matrix,
    y: &[f64],
    k: usize,
    estimate: &[usize],
    rho: f64,
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    check_measurements(matrix, y)?;
    check_sparsity(k, matrix.cols())?;
    check_indices(estimate, matrix.cols())?;
    check_unit_interval(rho, "rho")?;
    let mask = mask_of(estimate, matrix.cols());
    Ok(iterate(matrix, y, cfg, |g| fourset_threshold(g, &mask, k, rho)))
}

/// Weights `1` on the estimate and `1 - rho` off it.
pub fn build_weights(estimate: &[usize], rho: f64, n: usize) -> Result<WeightVector> {
    check_unit_interval(rho, "rho")?;
    check_indices(estimate, n)?;
    let mut w = vec![1.0 - rho; n];
    for &i in estimate {
        w[i] = 1.0;
    }
    WeightVector::new(w)
}

/// Supervised weighting with an explicit weight vector: select the `k`
/// largest entries of `gamma * w`, keep the unweighted values there.
pub fn biht_psw_weighted(
    matrix: &Matrix,
    y: &[f64],
    k: usize,
    weights: &WeightVector,
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    check_measurements(matrix, y)?;
    check_sparsity(k, matrix.cols())?;
    matrix.check_cols(weights.len(), "weight vector")?;
    let w = weights.as_slice();
    Ok(iterate(matrix, y, cfg, |g| {
        let scores: Vec<f64> = g.iter().zip(w).map(|(a, b)| a * b).collect();
        keep_only(g, &top_k_indices(&scores, k))
    }))
}

/// BIHT with partial support estimate weighting.
pub fn biht_psw(
    matrix: &Matrix,
    y: &[f64],
    k: usize,
    estimate: &[usize],
    rho: f64,
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult> {
    let weights = build_weights(estimate, rho, matrix.cols())?;
    biht_psw_weighted(matrix, y, k, &weights, cfg)
}

/// BIHT with unsupervised re-weighting. The first support estimate comes
/// from a plain BIHT run.
///
/// `iterations` on the result is the total over every inner run.
pub fn biht_urw(
    matrix: &Matrix,
    y: &[f64],
    k: usize,
    lambda: f64,
    n_rw: usize,
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult> {
    check_unit_interval(lambda, "lambda")?;
    let initial = biht(matrix, y, k, cfg)?;
    reweight(matrix, y, k, support_of(&initial.estimate), initial.iterations, lambda, n_rw, cfg)
}

/// Re-weighting loop started from a given support instead of a BIHT run.
/// Passing the true support gives the oracle-weight benchmark.
pub fn biht_urw_from_support(
    matrix: &Matrix,
    y: &[f64],
    k: usize,
    initial_support: &[usize],
    lambda: f64,
    n_rw: usize,
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult> {
    check_unit_interval(lambda, "lambda")?;
    check_indices(initial_support, matrix.cols())?;
    reweight(matrix, y, k, initial_support.to_vec(), 0, lambda, n_rw, cfg)
}

#[allow(clippy::too_many_arguments)]
fn reweight(
    matrix: &Matrix,
    y: &[f64],
    k: usize,
    mut support: Vec<usize>,
    mut iterations: usize,
    lambda: f64,
    n_rw: usize,
    cfg: &RecoveryConfig,
) -> Result<RecoveryResult> {
    if n_rw == 0 {
        return invalid("re-weighting count must be at least 1");
    }
    let mut last = None;
    for _ in 0..n_rw {
        let pass = biht_psw(matrix, y, k, &support, lambda, cfg)?;
        iterations += pass.iterations;
        support = support_of(&pass.estimate);
        last = Some(pass);
    }
    // The last pass is already normalized; renormalizing could perturb bits.
    let mut result = last.expect("n_rw >= 1");
    result.iterations = iterations;
    Ok(result)
}
