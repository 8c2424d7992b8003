//! Monte-Carlo sweeps over measurement counts and recovery variants.
//!
//! A trial is keyed by `(master_seed, m, trial_index)`. The signal, the
//! matrix and the support estimate are drawn from substreams of that key, so
//! every variant in a sweep sees the same problem instances and the outcome
//! does not depend on scheduling.

mod figures;
mod output;
pub mod verify;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use figures::{figure_config, FIGURE_NAMES};
pub use output::{csv_bytes, emit_csv, emit_plot, emit_trials_csv, render_svg, CSV_HEADER};

use crate::error::{invalid, Error, Result};
use crate::metrics::{self, TrialMetrics};
use crate::recovery::{self, RecoveryConfig, RecoveryResult};
use crate::rng::substream;
use crate::signal_model::{
    check_unit_interval, generate_matrix, generate_signal, make_support_estimate, measure, round_count, Matrix,
    SparseSignal,
};

const INSTANCE_STREAM: u64 = 0;
const ESTIMATE_STREAM: u64 = 1;

/// Recovery algorithm and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Variant {
    /// Plain BIHT, no support information.
    Biht,
    /// Exact support estimate; off-support entries scaled by `c`.
    Oracle { c: f64 },
    /// Four-case soft thresholding with an estimate of accuracy `rho`.
    Fourset {
        rho: f64,
        #[serde(default)]
        false_positives: bool,
    },
    /// Supervised weighting. The estimate is drawn with accuracy `rho`; the
    /// weights use `weight_rho` when given, `rho` otherwise.
    Psw {
        rho: f64,
        #[serde(default)]
        weight_rho: Option<f64>,
        #[serde(default)]
        false_positives: bool,
    },
    /// Unsupervised re-weighting seeded by a BIHT run.
    Urw { lambda: f64, n_rw: usize },
    /// Re-weighting seeded by the true support of the signal.
    UrwOracle { lambda: f64, n_rw: usize },
}

impl Variant {
    /// Identifier used in the `variant` CSV column.
    pub fn id(&self) -> String {
        match self {
            Variant::Biht => "biht".into(),
            Variant::Oracle { .. } => "oracle".into(),
            Variant::Fourset { false_positives, .. } => fp_suffix("fourset", *false_positives),
            Variant::Psw { rho, weight_rho, false_positives } => {
                let base = fp_suffix("psw", *false_positives);
                match weight_rho {
                    Some(w) if w != rho => format!("{base}_true{rho}"),
                    _ => base,
                }
            }
            Variant::Urw { n_rw, .. } => format!("urw_n{n_rw}"),
            Variant::UrwOracle { n_rw, .. } => format!("urw_oracle_n{n_rw}"),
        }
    }

    /// The swept parameter: name and value.
    pub fn param(&self) -> (&'static str, f64) {
        match *self {
            Variant::Biht => ("none", 0.0),
            Variant::Oracle { c } => ("c", c),
            Variant::Fourset { rho, .. } => ("rho", rho),
            Variant::Psw { rho, weight_rho, .. } => ("rho", weight_rho.unwrap_or(rho)),
            Variant::Urw { lambda, .. } | Variant::UrwOracle { lambda, .. } => ("lambda", lambda),
        }
    }

    pub fn label(&self) -> String {
        match self.param() {
            ("none", _) => self.id(),
            (name, value) => format!("{} {name}={value}", self.id()),
        }
    }

    fn estimate_params(&self) -> Option<(f64, bool)> {
        match *self {
            Variant::Oracle { .. } => Some((1.0, false)),
            Variant::Fourset { rho, false_positives } | Variant::Psw { rho, false_positives, .. } => {
                Some((rho, false_positives))
            }
            _ => None,
        }
    }

    pub fn validate(&self, n: usize, k: usize) -> Result<()> {
        match *self {
            Variant::Biht => {}
            Variant::Oracle { c } => {
                if !(0.0..1.0).contains(&c) {
                    return invalid(format!("oracle constant c must lie in [0, 1), got {c}"));
                }
            }
            Variant::Fourset { rho, .. } => check_unit_interval(rho, "rho")?,
            Variant::Psw { rho, weight_rho, .. } => {
                check_unit_interval(rho, "rho")?;
                if let Some(w) = weight_rho {
                    check_unit_interval(w, "weight_rho")?;
                }
            }
            Variant::Urw { lambda, n_rw } | Variant::UrwOracle { lambda, n_rw } => {
                check_unit_interval(lambda, "lambda")?;
                if n_rw == 0 {
                    return invalid("n_rw must be at least 1");
                }
            }
        }
        if let Some((rho, true)) = self.estimate_params() {
            let wrong = round_count((1.0 - rho) * k as f64);
            if k + wrong > n {
                return invalid(format!("{wrong} false positives do not fit next to k = {k} in n = {n}"));
            }
        }
        Ok(())
    }
}

fn fp_suffix(base: &str, fp: bool) -> String {
    if fp {
        format!("{base}_fp")
    } else {
        base.to_string()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Sweep description; also the JSON config file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub k: usize,
    pub m_grid: Vec<usize>,
    pub variants: Vec<Variant>,
    pub trials: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_tau() -> f64 {
    RecoveryConfig::default().tau
}
fn default_tol() -> f64 {
    RecoveryConfig::default().tol
}
fn default_max_iters() -> usize {
    RecoveryConfig::default().max_iters
}

impl SweepConfig {
    pub fn recovery(&self) -> RecoveryConfig {
        RecoveryConfig { tau: self.tau, max_iters: self.max_iters, tol: self.tol }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return invalid(format!("need 0 < k <= n, got k = {}, n = {}", self.k, self.n));
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.m_grid.is_empty() {
            return invalid("m_grid must not be empty");
        }
        if self.m_grid[0] == 0 || self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("m_grid must be positive and strictly increasing");
        }
        if self.variants.is_empty() {
            return invalid("at least one variant is required");
        }
        self.recovery().validate()?;
        for v in &self.variants {
            v.validate(self.n, self.k)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// One generated problem: ground truth plus its measurements.
#[derive(Debug, Clone)]
pub struct Instance {
    pub signal: SparseSignal,
    pub matrix: Matrix,
    pub signs: Vec<f64>,
}

impl Instance {
    pub fn generate(master_seed: u64, n: usize, k: usize, m: usize, trial: usize) -> Result<Self> {
        let mut rng = substream(master_seed, &[m as u64, trial as u64, INSTANCE_STREAM]);
        let signal = generate_signal(n, k, &mut rng)?;
        let matrix = generate_matrix(m, n, &mut rng)?;
        let signs = measure(&matrix, &signal.values)?;
        Ok(Self { signal, matrix, signs })
    }

    /// Run `variant` on this instance. The support estimate, when one is
    /// needed, is drawn from the `(master_seed, m, trial)` estimate stream.
    pub fn recover(
        &self,
        variant: &Variant,
        cfg: &RecoveryConfig,
        master_seed: u64,
        trial: usize,
    ) -> Result<RecoveryResult> {
        let (a, y, k, n) = (&self.matrix, &self.signs[..], self.signal.k, self.signal.n());
        let estimate = match variant.estimate_params() {
            Some((rho, fp)) => {
                let mut rng = substream(master_seed, &[a.rows() as u64, trial as u64, ESTIMATE_STREAM]);
                make_support_estimate(&self.signal.support, rho, fp, n, &mut rng)?.indices
            }
            None => Vec::new(),
        };
        match *variant {
            Variant::Biht => recovery::biht(a, y, k, cfg),
            Variant::Oracle { c } => recovery::biht_oracle(a, y, &estimate, c, cfg),
            Variant::Fourset { rho, .. } => recovery::biht_fourset(a, y, k, &estimate, rho, cfg),
            Variant::Psw { rho, weight_rho, .. } => {
                recovery::biht_psw(a, y, k, &estimate, weight_rho.unwrap_or(rho), cfg)
            }
            Variant::Urw { lambda, n_rw } => recovery::biht_urw(a, y, k, lambda, n_rw, cfg),
            Variant::UrwOracle { lambda, n_rw } => {
                recovery::biht_urw_from_support(a, y, k, &self.signal.support, lambda, n_rw, cfg)
            }
        }
    }

    pub fn evaluate(&self, result: &RecoveryResult) -> Result<TrialMetrics> {
        Ok(TrialMetrics {
            mse: metrics::mse(&self.signal.values, &result.estimate)?,
            consistency: metrics::sign_consistency(&self.matrix, &result.estimate, &self.signs)?,
            support_recall: metrics::support_recall(&self.signal.support, &result.estimate)?,
            iterations: result.iterations,
            degenerate: result.degenerate,
        })
    }
}

fn with_provenance(m: usize, variant: &Variant, trial: usize) -> impl FnOnce(Error) -> Error {
    let variant = variant.label();
    move |e| Error::Trial { m, variant, trial, source: Box::new(e) }
}

fn trial_metrics(cfg: &SweepConfig, instance: &Instance, variant: &Variant, m: usize, trial: usize) -> Result<TrialMetrics> {
    instance
        .recover(variant, &cfg.recovery(), cfg.master_seed, trial)
        .and_then(|r| instance.evaluate(&r))
        .map_err(with_provenance(m, variant, trial))
}

/// Run one seeded trial of `variant` at measurement count `m`.
pub fn run_trial(cfg: &SweepConfig, variant: &Variant, m: usize, trial_index: usize) -> Result<TrialMetrics> {
    cfg.validate()?;
    if !cfg.m_grid.contains(&m) {
        return invalid(format!("m = {m} is not in the sweep grid"));
    }
    if trial_index >= cfg.trials {
        return invalid(format!("trial index {trial_index} out of range for {} trials", cfg.trials));
    }
    let instance = Instance::generate(cfg.master_seed, cfg.n, cfg.k, m, trial_index)
        .map_err(with_provenance(m, variant, trial_index))?;
    trial_metrics(cfg, &instance, variant, m, trial_index)
}

/// Aggregated statistics for one `(m, variant)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub variant: String,
    pub param_name: String,
    pub param_value: f64,
    pub mean_mse: f64,
    pub sem_mse: f64,
    pub mean_consistency: f64,
    pub mean_support_recall: f64,
    pub mean_iters: f64,
    pub degenerate_count: usize,
}

/// Raw metrics of a single trial, kept for auditing and SEM checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub m: usize,
    pub variant: String,
    pub param_value: f64,
    pub trial: usize,
    pub metrics: TrialMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub config: SweepConfig,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub trials: Vec<TrialRecord>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn row(&self, m: usize, variant: &Variant) -> Option<&SweepRow> {
        let (id, (_, value)) = (variant.id(), variant.param());
        self.rows
            .iter()
            .find(|r| r.m == m && r.variant == id && r.param_value == value)
    }

    pub fn mean_mse(&self, m: usize, variant: &Variant) -> Option<f64> {
        self.row(m, variant).map(|r| r.mean_mse)
    }

    /// Per-trial MSE values for one row, in trial order.
    pub fn trial_mses(&self, m: usize, variant: &Variant) -> Vec<f64> {
        let (id, (_, value)) = (variant.id(), variant.param());
        self.trials
            .iter()
            .filter(|t| t.m == m && t.variant == id && t.param_value == value)
            .map(|t| t.metrics.mse)
            .collect()
    }
}

/// Mean and standard error (sample standard deviation over `sqrt(len)`).
pub fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(m: usize, variant: &Variant, per_trial: &[TrialMetrics]) -> SweepRow {
    let mses: Vec<f64> = per_trial.iter().map(|t| t.mse).collect();
    let (mean_mse, sem_mse) = mean_and_sem(&mses);
    let count = per_trial.len() as f64;
    let (name, value) = variant.param();
    SweepRow {
        m,
        variant: variant.id(),
        param_name: name.to_string(),
        param_value: value,
        mean_mse,
        sem_mse,
        mean_consistency: per_trial.iter().map(|t| t.consistency).sum::<f64>() / count,
        mean_support_recall: per_trial.iter().map(|t| t.support_recall).sum::<f64>() / count,
        mean_iters: per_trial.iter().map(|t| t.iterations as f64).sum::<f64>() / count,
        degenerate_count: per_trial.iter().filter(|t| t.degenerate).count(),
    }
}

/// Run every trial of the sweep on the global rayon pool.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with_workers(cfg, None)
}

/// Run the sweep on a dedicated pool of `workers` threads (`None` uses the
/// global pool). The result is identical for every worker count.
pub fn run_sweep_with_workers(cfg: &SweepConfig, workers: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    match workers {
        None => sweep_inner(cfg),
        Some(0) => invalid("worker count must be at least 1"),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?
            .install(|| sweep_inner(cfg)),
    }
}

fn sweep_inner(cfg: &SweepConfig) -> Result<SweepResult> {
    let jobs: Vec<(usize, usize)> = cfg
        .m_grid
        .iter()
        .flat_map(|&m| (0..cfg.trials).map(move |t| (m, t)))
        .collect();

    // outcomes[job][variant]
    let outcomes: Vec<Vec<TrialMetrics>> = jobs
        .par_iter()
        .map(|&(m, trial)| {
            let instance = Instance::generate(cfg.master_seed, cfg.n, cfg.k, m, trial)
                .map_err(with_provenance(m, &cfg.variants[0], trial))?;
            cfg.variants
                .iter()
                .map(|v| trial_metrics(cfg, &instance, v, m, trial))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (mi, &m) in cfg.m_grid.iter().enumerate() {
        let block = &outcomes[mi * cfg.trials..(mi + 1) * cfg.trials];
        for (vi, variant) in cfg.variants.iter().enumerate() {
            let per_trial: Vec<TrialMetrics> = block.iter().map(|o| o[vi]).collect();
            rows.push(aggregate(m, variant, &per_trial));
            let (id, (_, value)) = (variant.id(), variant.param());
            records.extend(per_trial.into_iter().enumerate().map(|(trial, metrics)| TrialRecord {
                m,
                variant: id.clone(),
                param_value: value,
                trial,
                metrics,
            }));
        }
    }
    // Stable: variants sharing a parameter value keep their config order.
    rows.sort_by(|a, b| a.m.cmp(&b.m).then(a.param_value.total_cmp(&b.param_value)));

    Ok(SweepResult {
        rows,
        trials: records,
        provenance: Provenance {
            master_seed: cfg.master_seed,
            config: cfg.clone(),
            version: crate::VERSION.to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(variants: Vec<Variant>) -> SweepConfig {
        SweepConfig {
            n: 32,
            k: 3,
            m_grid: vec![20, 40],
            variants,
            trials: 4,
            tau: 1e-3,
            tol: 1e-10,
            max_iters: 200,
            master_seed: 17,
        }
    }

    #[test]
    fn variant_ids_and_params() {
        assert_eq!(Variant::Biht.id(), "biht");
        assert_eq!(Variant::Biht.label(), "biht");
        let wrong = Variant::Psw { rho: 0.9, weight_rho: Some(0.1), false_positives: false };
        assert_eq!(wrong.id(), "psw_true0.9");
        assert_eq!(wrong.param(), ("rho", 0.1));
        let same = Variant::Psw { rho: 0.9, weight_rho: Some(0.9), false_positives: true };
        assert_eq!(same.id(), "psw_fp");
        assert_eq!(Variant::Urw { lambda: 0.5, n_rw: 2 }.label(), "urw_n2 lambda=0.5");
    }

    #[test]
    fn variant_json_round_trip() {
        let text = r#"{"kind":"fourset","rho":0.5,"false_positives":true}"#;
        let v: Variant = serde_json::from_str(text).unwrap();
        assert_eq!(v, Variant::Fourset { rho: 0.5, false_positives: true });
        let psw: Variant = serde_json::from_str(r#"{"kind":"psw","rho":0.3}"#).unwrap();
        assert_eq!(psw, Variant::Psw { rho: 0.3, weight_rho: None, false_positives: false });
    }

    #[test]
    fn config_validation() {
        let mut cfg = small(vec![Variant::Biht]);
        assert!(cfg.validate().is_ok());
        cfg.m_grid = vec![40, 20];
        assert!(cfg.validate().is_err());
        let mut cfg = small(vec![]);
        assert!(cfg.validate().is_err());
        cfg.variants = vec![Variant::Oracle { c: 1.0 }];
        assert!(cfg.validate().is_err());
        cfg.variants = vec![Variant::Urw { lambda: 0.5, n_rw: 0 }];
        assert!(cfg.validate().is_err());
        let mut cfg = small(vec![Variant::Fourset { rho: 0.0, false_positives: true }]);
        cfg.n = 5;
        assert!(cfg.validate().is_err());
        let mut cfg = small(vec![Variant::Biht]);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn run_trial_is_deterministic() {
        let cfg = small(vec![Variant::Biht]);
        let a = run_trial(&cfg, &Variant::Biht, 20, 1).unwrap();
        let b = run_trial(&cfg, &Variant::Biht, 20, 1).unwrap();
        assert_eq!(a, b);
        assert!(run_trial(&cfg, &Variant::Biht, 21, 1).is_err());
        assert!(run_trial(&cfg, &Variant::Biht, 20, 4).is_err());
    }

    #[test]
    fn psw_without_confidence_matches_biht_trial() {
        let psw = Variant::Psw { rho: 0.0, weight_rho: None, false_positives: false };
        let cfg = small(vec![Variant::Biht, psw.clone()]);
        for t in 0..4 {
            let a = run_trial(&cfg, &Variant::Biht, 40, t).unwrap();
            let b = run_trial(&cfg, &psw, 40, t).unwrap();
            assert_eq!(a.mse.to_bits(), b.mse.to_bits());
        }
    }

    #[test]
    fn sweep_rows_and_sem() {
        let cfg = small(vec![Variant::Biht, Variant::Oracle { c: 0.0 }]);
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.rows.len(), 4);
        assert_eq!(result.trials.len(), 16);
        for row in &result.rows {
            let v = cfg.variants.iter().find(|v| v.id() == row.variant).unwrap();
            let mses = result.trial_mses(row.m, v);
            assert_eq!(mses.len(), 4);
            let mean = mses.iter().sum::<f64>() / 4.0;
            let sd = (mses.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
            assert!((row.sem_mse - sd / 2.0).abs() < 1e-12);
            assert!((0.0..=4.0).contains(&row.mean_mse));
        }
        // sweep trials agree with standalone trials
        let direct = run_trial(&cfg, &Variant::Oracle { c: 0.0 }, 40, 2).unwrap();
        let rec = result
            .trials
            .iter()
            .find(|t| t.m == 40 && t.variant == "oracle" && t.trial == 2)
            .unwrap();
        assert_eq!(rec.metrics, direct);
    }

    #[test]
    fn single_row_sweep() {
        let mut cfg = small(vec![Variant::Biht]);
        cfg.trials = 1;
        cfg.m_grid = vec![100];
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.rows.len(), 1);
        assert_eq!(result.rows[0].sem_mse, 0.0);
    }

    #[test]
    fn mean_and_sem_matches_hand_computation() {
        let (mean, sem) = mean_and_sem(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        // sample variance 5/3, sem = sqrt(5/12)
        assert!((sem - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
