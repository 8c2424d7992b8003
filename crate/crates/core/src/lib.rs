//! One-bit compressive sensing with partial support information.
//!
//! Sign measurements `y = sign(A x)` of a k-sparse unit-norm signal are
//! inverted with binary iterative hard thresholding (BIHT) and variants that
//! fold in an a-priori support estimate:
//!
//! * [`recovery::biht_oracle`]: trusted estimate, hard or soft thresholding off it
//! * [`recovery::biht_fourset`]: four-case soft weighting against the current top-k set
//! * [`recovery::biht_psw`]: top-k selection on weighted values, unweighted values kept
//! * [`recovery::biht_urw`]: estimate bootstrapped from BIHT and re-weighted
//!
//! [`experiments`] runs seeded Monte-Carlo sweeps over these and writes CSV
//! tables and SVG plots.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod recovery;
pub mod rng;
pub mod signal_model;

pub use error::{Error, Result};
pub use metrics::TrialMetrics;
pub use recovery::{RecoveryConfig, RecoveryResult, WeightVector};
pub use signal_model::{Matrix, MeasurementEnsemble, SparseSignal, SupportEstimate};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
