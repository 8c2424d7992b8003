//! Ground-truth sparse signals, Gaussian measurement matrices, one-bit
//! measurements and synthetic support estimates.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sign map used everywhere in the crate: `sign(0) = +1`.
#[inline]
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Round half away from zero, used for the `round(rho * k)` counts.
#[inline]
pub(crate) fn round_count(v: f64) -> usize {
    v.round() as usize
}

/// Dense row-major real matrix. Rows are the measurement vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid(format!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        if data.len() != rows * cols {
            return invalid(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("ragged matrix rows");
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks_exact(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn check_cols(&self, len: usize, what: &str) -> Result<()> {
        if self.cols != len {
            return invalid(format!(
                "{what} has length {len} but matrix has {} columns",
                self.cols
            ));
        }
        Ok(())
    }

    pub(crate) fn check_rows(&self, len: usize, what: &str) -> Result<()> {
        if self.rows != len {
            return invalid(format!(
                "{what} has length {len} but matrix has {} rows",
                self.rows
            ));
        }
        Ok(())
    }

    /// `self * x`, skipping the zero entries of `x`.
    ///
    /// Terms are accumulated in ascending column order starting from `+0.0`,
    /// so the result is bitwise identical to the dense loop.
    pub(crate) fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let nz: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                nz.iter().fold(0.0, |acc, &j| acc + row[j] * x[j])
            })
            .collect()
    }

    /// Signs of `self * x` under `sign(0) = +1`.
    pub(crate) fn sign_product(&self, x: &[f64]) -> Vec<f64> {
        self.mul_vec(x).into_iter().map(sign).collect()
    }
}

/// k-sparse unit-norm ground-truth signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    pub values: Vec<f64>,
    /// Sorted ascending.
    pub support: Vec<usize>,
    pub k: usize,
}

impl SparseSignal {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Multiply by a positive constant. The support is unchanged; the result
    /// is no longer unit-norm, which is only useful for measurement tests.
    pub fn scaled(&self, alpha: f64) -> Vec<f64> {
        self.values.iter().map(|v| v * alpha).collect()
    }
}

/// Gaussian matrix together with the signs it produced.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    pub matrix: Matrix,
    pub signs: Vec<f64>,
}

impl MeasurementEnsemble {
    pub fn generate<R: Rng + ?Sized>(m: usize, signal: &SparseSignal, rng: &mut R) -> Result<Self> {
        let matrix = generate_matrix(m, signal.n(), rng)?;
        let signs = measure(&matrix, &signal.values)?;
        Ok(Self { matrix, signs })
    }

    pub fn m(&self) -> usize {
        self.signs.len()
    }
}

/// A-priori guess of the signal support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    /// Sorted ascending, no duplicates.
    pub indices: Vec<usize>,
    pub rho: f64,
    pub has_false_positives: bool,
}

impl SupportEstimate {
    /// Estimate from explicit indices (sorted and deduplicated here).
    pub fn from_indices(mut indices: Vec<usize>, rho: f64, n: usize) -> Result<Self> {
        check_unit_interval(rho, "rho")?;
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return invalid(format!("support index {bad} out of range for n = {n}"));
        }
        Ok(Self { indices, rho, has_false_positives: false })
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &i in &self.indices {
            mask[i] = true;
        }
        mask
    }
}

pub(crate) fn check_unit_interval(v: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return invalid(format!("{name} must lie in [0, 1], got {v}"));
    }
    Ok(())
}

/// Draw a uniformly supported k-sparse signal with standard normal
/// nonzeros, normalized to unit Euclidean norm.
pub fn generate_signal<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<SparseSignal> {
    if k == 0 || k > n {
        return invalid(format!("sparsity must satisfy 0 < k <= n, got k = {k}, n = {n}"));
    }
    let mut support = index::sample(rng, n, k).into_vec();
    support.sort_unstable();

    let mut values = vec![0.0; n];
    for &i in &support {
        let mut v: f64 = rng.sample(StandardNormal);
        while v == 0.0 {
            v = rng.sample(StandardNormal);
        }
        values[i] = v;
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    values.iter_mut().for_each(|v| *v /= norm);

    Ok(SparseSignal { values, support, k })
}

/// m x n matrix of i.i.d. standard normal entries, filled row by row.
pub fn generate_matrix<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Matrix> {
    if m == 0 || n == 0 {
        return invalid(format!("matrix dimensions must be positive, got {m}x{n}"));
    }
    let data = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_row_major(m, n, data)
}

/// One-bit measurements `y_i = sign(<x, phi_i>)`.
pub fn measure(matrix: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    matrix.check_cols(x.len(), "signal")?;
    Ok(matrix.sign_product(x))
}

/// Synthetic support estimate: `round(rho*k)` indices drawn from the true
/// support, plus `round((1-rho)*k)` indices from its complement when
/// `with_false_positives` is set.
pub fn make_support_estimate<R: Rng + ?Sized>(
    support: &[usize],
    rho: f64,
    with_false_positives: bool,
    n: usize,
    rng: &mut R,
) -> Result<SupportEstimate> {
    check_unit_interval(rho, "rho")?;
    let k = support.len();
    if k > n {
        return invalid(format!("support of size {k} exceeds dimension {n}"));
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= n) {
        return invalid(format!("support index {bad} out of range for n = {n}"));
    }

    let correct = round_count(rho * k as f64);
    let wrong = if with_false_positives { round_count((1.0 - rho) * k as f64) } else { 0 };

    let mut in_support = vec![false; n];
    for &i in support {
        in_support[i] = true;
    }
    let complement: Vec<usize> = (0..n).filter(|&i| !in_support[i]).collect();
    if wrong > complement.len() {
        return invalid(format!(
            "{wrong} false positives requested but only {} indices lie off the support",
            complement.len()
        ));
    }

    let mut indices: Vec<usize> = index::sample(rng, k, correct).into_iter().map(|p| support[p]).collect();
    if wrong > 0 {
        indices.extend(index::sample(rng, complement.len(), wrong).into_iter().map(|p| complement[p]));
    }
    indices.sort_unstable();

    Ok(SupportEstimate { indices, rho, has_false_positives: with_false_positives })
}
