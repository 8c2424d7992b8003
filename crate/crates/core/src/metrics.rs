//! Recovery quality measures.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::signal_model::{sign, Matrix};

const UNIT_NORM_TOL: f64 = 1e-9;

/// Metrics for a single recovery trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub mse: f64,
    pub consistency: f64,
    pub support_recall: f64,
    pub iterations: usize,
    pub degenerate: bool,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Squared Euclidean distance between a unit-norm truth and a unit-norm (or
/// zero) estimate. Zero estimates score exactly 1.
pub fn mse(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return invalid(format!("length mismatch: {} vs {}", x.len(), x_hat.len()));
    }
    let nx = norm2(x);
    if (nx - 1.0).abs() > UNIT_NORM_TOL {
        return invalid(format!("reference signal must be unit-norm, has norm {nx}"));
    }
    let nh = norm2(x_hat);
    if nh == 0.0 {
        return Ok(1.0);
    }
    if (nh - 1.0).abs() > UNIT_NORM_TOL {
        return invalid(format!("estimate must be unit-norm or zero, has norm {nh}"));
    }
    let d: f64 = x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(d.clamp(0.0, 4.0))
}

/// Fraction of measurements whose sign is reproduced by `x_hat`.
pub fn sign_consistency(matrix: &Matrix, x_hat: &[f64], y: &[f64]) -> Result<f64> {
    matrix.check_cols(x_hat.len(), "estimate")?;
    matrix.check_rows(y.len(), "measurement vector")?;
    let agree = (0..matrix.rows())
        .filter(|&i| {
            let dot: f64 = matrix.row(i).iter().zip(x_hat).map(|(a, b)| a * b).sum();
            sign(dot) == y[i]
        })
        .count();
    Ok(agree as f64 / matrix.rows() as f64)
}

/// `|supp(x_hat) ∩ T| / |T|`.
pub fn support_recall(support: &[usize], x_hat: &[f64]) -> Result<f64> {
    if support.is_empty() {
        return invalid("true support must be nonempty");
    }
    let hits = support
        .iter()
        .filter(|&&i| x_hat.get(i).is_some_and(|&v| v != 0.0))
        .count();
    Ok(hits as f64 / support.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::signal_model::{generate_matrix, generate_signal, measure};

    #[test]
    fn mse_examples() {
        let x = [0.6, 0.8, 0.0];
        assert_eq!(mse(&x, &x).unwrap(), 0.0);
        let neg = [-0.6, -0.8, 0.0];
        assert!((mse(&x, &neg).unwrap() - 4.0).abs() < 1e-15);
        let orth = [0.0, 0.0, 1.0];
        assert!((mse(&x, &orth).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(mse(&x, &[0.0; 3]).unwrap(), 1.0);
        assert!(mse(&[1.0, 1.0, 0.0], &x).is_err());
        assert!(mse(&x, &[0.5, 0.0, 0.0]).is_err());
        assert!(mse(&x, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn consistency_examples() {
        let mut rng = stream(4);
        let x = generate_signal(32, 4, &mut rng).unwrap();
        let a = generate_matrix(50, 32, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        assert_eq!(sign_consistency(&a, &x.values, &y).unwrap(), 1.0);
        let neg: Vec<f64> = x.values.iter().map(|v| -v).collect();
        assert_eq!(sign_consistency(&a, &neg, &y).unwrap(), 0.0);
        assert!(sign_consistency(&a, &x.values[..31], &y).is_err());
        assert!(sign_consistency(&a, &x.values, &y[..49]).is_err());
    }

    #[test]
    fn consistency_of_zero_estimate_counts_positive_signs() {
        let mut rng = stream(5);
        let x = generate_signal(16, 2, &mut rng).unwrap();
        let a = generate_matrix(40, 16, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        let positives = y.iter().filter(|&&v| v > 0.0).count() as f64 / 40.0;
        assert_eq!(sign_consistency(&a, &[0.0; 16], &y).unwrap(), positives);
    }

    #[test]
    fn recall_examples() {
        let t = [0, 1, 2, 3, 4, 5, 6, 7];
        let mut x = vec![0.0; 16];
        t.iter().for_each(|&i| x[i] = 1.0);
        assert_eq!(support_recall(&t, &x).unwrap(), 1.0);
        let mut disjoint = vec![0.0; 16];
        disjoint[10] = 1.0;
        assert_eq!(support_recall(&t, &disjoint).unwrap(), 0.0);
        x[0] = 0.0;
        x[1] = 0.0;
        assert_eq!(support_recall(&t, &x).unwrap(), 0.75);
        assert!(support_recall(&[], &x).is_err());
    }
}
