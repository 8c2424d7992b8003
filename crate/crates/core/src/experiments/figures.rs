//! Bundled sweep configurations, one per figure layout.

use super::{SweepConfig, Variant};
use crate::error::{invalid, Result};
use crate::recovery::RecoveryConfig;

pub const FIGURE_NAMES: [&str; 8] = ["fig1", "fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig5a", "fig5b"];

const FOURSET_RHOS: [f64; 3] = [0.1, 0.5, 0.9];
const PSW_RHOS: [f64; 3] = [0.3, 0.6, 0.9];

fn m_grid() -> Vec<usize> {
    (1..=10).map(|i| 50 * i).collect()
}

fn base(k: usize, variants: Vec<Variant>, trials: usize, seed: u64) -> SweepConfig {
    let rc = RecoveryConfig::default();
    SweepConfig {
        n: 256,
        k,
        m_grid: m_grid(),
        variants,
        trials,
        tau: rc.tau,
        tol: rc.tol,
        max_iters: rc.max_iters,
        master_seed: seed,
    }
}

fn with_baseline(rest: impl IntoIterator<Item = Variant>) -> Vec<Variant> {
    std::iter::once(Variant::Biht).chain(rest).collect()
}

fn urw_variants() -> Vec<Variant> {
    with_baseline(
        (1..=3)
            .map(|n_rw| Variant::Urw { lambda: 0.5, n_rw })
            .chain(std::iter::once(Variant::UrwOracle { lambda: 0.5, n_rw: 1 })),
    )
}

/// Configuration for a named figure at n = 256, m in {50, ..., 500}.
pub fn figure_config(name: &str, trials: usize, seed: u64) -> Result<SweepConfig> {
    let variants = match name {
        "fig1" => with_baseline([Variant::Oracle { c: 0.0 }, Variant::Oracle { c: 0.5 }]),
        "fig2a" | "fig2b" => {
            let fp = name == "fig2b";
            with_baseline(FOURSET_RHOS.map(|rho| Variant::Fourset { rho, false_positives: fp }))
        }
        "fig3a" | "fig3b" => {
            let fp = name == "fig3b";
            with_baseline(PSW_RHOS.map(|rho| Variant::Psw { rho, weight_rho: None, false_positives: fp }))
        }
        "fig4" => with_baseline(
            [0.9, 0.1].map(|w| Variant::Psw { rho: 0.9, weight_rho: Some(w), false_positives: false }),
        ),
        "fig5a" => urw_variants(),
        "fig5b" => return Ok(base(20, urw_variants(), trials, seed)),
        other => {
            return invalid(format!("unknown figure {other:?}; expected one of {}", FIGURE_NAMES.join(", ")))
        }
    };
    Ok(base(8, variants, trials, seed))
}
