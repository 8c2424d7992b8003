use onebit_core::metrics::{mse, sign_consistency, support_recall};
use onebit_core::recovery::{
    biht, biht_fourset, biht_oracle, biht_psw, biht_psw_weighted, biht_step, build_weights, prune, RecoveryConfig,
    WeightVector,
};
use onebit_core::rng::stream;
use onebit_core::signal_model::{generate_matrix, generate_signal, make_support_estimate, measure, Matrix};
use proptest::prelude::*;

/// Best k-subset by retained energy, lowest lexicographic subset on ties.
fn brute_force_prune(z: &[f64], k: usize) -> Vec<f64> {
    let n = z.len();
    let mut best: Option<(f64, u32)> = None;
    // Iterate masks in lexicographic order of their sorted index lists.
    let mut subsets: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect();
    subsets.sort();
    let mut keep = Vec::new();
    for s in subsets {
        let e: f64 = s.iter().map(|&i| z[i] * z[i]).sum();
        if best.is_none_or(|(b, _)| e > b) {
            best = Some((e, 0));
            keep = s;
        }
    }
    let mut out = vec![0.0; n];
    for i in keep {
        out[i] = z[i];
    }
    out
}

fn dense_step(x: &[f64], a: &Matrix, y: &[f64], tau: f64) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let residual: Vec<f64> = (0..m)
        .map(|i| {
            let dot: f64 = x.iter().enumerate().map(|(j, xj)| a.get(i, j) * xj).sum();
            y[i] - if dot >= 0.0 { 1.0 } else { -1.0 }
        })
        .collect();
    (0..n)
        .map(|j| {
            let g: f64 = residual.iter().enumerate().map(|(i, r)| a.get(i, j) * r).sum();
            x[j] + tau / 2.0 * g
        })
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn generated_signals_are_k_sparse_and_unit() {
    let mut meta = stream(99);
    for t in 0..1000u64 {
        use rand::Rng;
        let n = meta.random_range(1..=300);
        let k = meta.random_range(1..=n);
        let x = generate_signal(n, k, &mut stream(t)).unwrap();
        assert_eq!(x.support.len(), k);
        assert_eq!(x.values.iter().filter(|&&v| v != 0.0).count(), k);
        assert!(x.support.iter().all(|&i| x.values[i] != 0.0));
        assert!((norm(&x.values) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn generation_is_deterministic() {
    let a = generate_signal(128, 6, &mut stream(5)).unwrap();
    let b = generate_signal(128, 6, &mut stream(5)).unwrap();
    assert_eq!(a, b);
    let e1 = make_support_estimate(&a.support, 0.5, true, 128, &mut stream(6)).unwrap();
    let e2 = make_support_estimate(&a.support, 0.5, true, 128, &mut stream(6)).unwrap();
    assert_eq!(e1, e2);
}

#[test]
fn measure_matches_direct_loop() {
    for seed in 0..50 {
        let mut rng = stream(seed);
        let x = generate_signal(40, 5, &mut rng).unwrap();
        let a = generate_matrix(30, 40, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        for (i, yi) in y.iter().enumerate() {
            let dot: f64 = (0..40).map(|j| a.get(i, j) * x.values[j]).sum();
            assert_eq!(*yi, if dot >= 0.0 { 1.0 } else { -1.0 });
        }
    }
}

#[test]
fn biht_step_matches_dense_loop() {
    for seed in 0..50 {
        let mut rng = stream(seed);
        let x = generate_signal(32, 4, &mut rng).unwrap();
        let a = generate_matrix(48, 32, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        let guess = generate_signal(32, 6, &mut rng).unwrap();
        let got = biht_step(&guess.values, &a, &y, 1e-2).unwrap();
        let want = dense_step(&guess.values, &a, &y, 1e-2);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-13 * w.abs().max(1.0), "{g} vs {w}");
        }
    }
}

#[test]
fn consistency_matches_direct_loop() {
    for seed in 0..30 {
        let mut rng = stream(seed);
        let x = generate_signal(24, 3, &mut rng).unwrap();
        let a = generate_matrix(60, 24, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        let guess = generate_signal(24, 3, &mut rng).unwrap();
        let direct = (0..60)
            .filter(|&i| {
                let dot: f64 = (0..24).map(|j| a.get(i, j) * guess.values[j]).sum();
                (if dot >= 0.0 { 1.0 } else { -1.0 }) == y[i]
            })
            .count() as f64
            / 60.0;
        assert_eq!(sign_consistency(&a, &guess.values, &y).unwrap(), direct);
    }
}

#[test]
fn recovery_is_invariant_to_signal_scale() {
    let cfg = RecoveryConfig::default();
    for seed in 0..20 {
        let mut rng = stream(seed);
        let x = generate_signal(48, 3, &mut rng).unwrap();
        let a = generate_matrix(80, 48, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        let y_scaled = measure(&a, &x.scaled(3.5)).unwrap();
        assert_eq!(y, y_scaled);
        assert_eq!(biht(&a, &y, 3, &cfg).unwrap(), biht(&a, &y_scaled, 3, &cfg).unwrap());
    }
}

#[test]
fn recovery_outputs_unit_or_degenerate() {
    let cfg = RecoveryConfig { max_iters: 200, ..Default::default() };
    for seed in 0..60 {
        let mut rng = stream(1000 + seed);
        let x = generate_signal(32, 3, &mut rng).unwrap();
        let a = generate_matrix(40, 32, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        let est = make_support_estimate(&x.support, 0.6, true, 32, &mut rng).unwrap();
        let runs = [
            (biht(&a, &y, 3, &cfg).unwrap(), 3),
            (biht_psw(&a, &y, 3, &est.indices, 0.6, &cfg).unwrap(), 3),
            (biht_fourset(&a, &y, 3, &est.indices, 0.6, &cfg).unwrap(), 3 + est.len()),
            (biht_oracle(&a, &y, &x.support, 0.5, &cfg).unwrap(), 32),
        ];
        for (r, bound) in runs {
            let nnz = r.estimate.iter().filter(|&&v| v != 0.0).count();
            assert!(nnz <= bound);
            if r.degenerate {
                assert!(r.estimate.iter().all(|&v| v == 0.0));
            } else {
                assert!((norm(&r.estimate) - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn consistent_estimates_are_fixed_points() {
    let cfg = RecoveryConfig::default();
    let mut checked = 0;
    for seed in 0..40 {
        let mut rng = stream(2000 + seed);
        let x = generate_signal(32, 2, &mut rng).unwrap();
        let a = generate_matrix(24, 32, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        let r = biht(&a, &y, 2, &cfg).unwrap();
        if r.consistent {
            checked += 1;
            assert_eq!(biht_step(&r.estimate, &a, &y, cfg.tau).unwrap(), r.estimate);
            assert!(r.converged);
        }
    }
    assert!(checked > 0);
}

proptest! {
    #[test]
    fn prune_matches_brute_force(z in prop::collection::vec(-4i32..=4, 1..=10), k_frac in 0.0f64..=1.0) {
        let z: Vec<f64> = z.into_iter().map(f64::from).collect();
        let k = (k_frac * z.len() as f64).round() as usize;
        prop_assert_eq!(prune(&z, k).unwrap(), brute_force_prune(&z, k));
    }

    #[test]
    fn prune_keeps_values_and_is_idempotent(z in prop::collection::vec(-10.0f64..10.0, 1..40), k_frac in 0.0f64..=1.0) {
        let k = (k_frac * z.len() as f64).floor() as usize;
        let p = prune(&z, k).unwrap();
        prop_assert!(p.iter().filter(|&&v| v != 0.0).count() <= k);
        for (a, b) in p.iter().zip(&z) {
            prop_assert!(*a == 0.0 || a == b);
        }
        prop_assert_eq!(prune(&p, k).unwrap(), p);
    }

    #[test]
    fn measurements_are_scale_invariant(seed in any::<u64>(), alpha in 1e-3f64..1e3) {
        let mut rng = stream(seed);
        let x = generate_signal(30, 4, &mut rng).unwrap();
        let a = generate_matrix(20, 30, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        prop_assert!(y.iter().all(|&v| v == 1.0 || v == -1.0));
        prop_assert_eq!(y, measure(&a, &x.scaled(alpha)).unwrap());
    }

    #[test]
    fn mse_is_symmetric_and_bounded(s1 in any::<u64>(), s2 in any::<u64>()) {
        let x = generate_signal(16, 3, &mut stream(s1)).unwrap().values;
        let z = generate_signal(16, 5, &mut stream(s2)).unwrap().values;
        let d = mse(&x, &z).unwrap();
        prop_assert!((0.0..=4.0).contains(&d));
        prop_assert!((d - mse(&z, &x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn zero_mse_means_full_recall(seed in any::<u64>()) {
        let x = generate_signal(20, 4, &mut stream(seed)).unwrap();
        prop_assert_eq!(mse(&x.values, &x.values).unwrap(), 0.0);
        prop_assert_eq!(support_recall(&x.support, &x.values).unwrap(), 1.0);
    }

    #[test]
    fn consistency_ignores_positive_scaling(seed in any::<u64>(), alpha in 1e-3f64..1e3) {
        let mut rng = stream(seed);
        let a = generate_matrix(25, 12, &mut rng).unwrap();
        let x = generate_signal(12, 3, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        let guess = generate_signal(12, 2, &mut rng).unwrap();
        prop_assert_eq!(
            sign_consistency(&a, &guess.values, &y).unwrap(),
            sign_consistency(&a, &guess.scaled(alpha), &y).unwrap()
        );
    }

    #[test]
    fn psw_selection_ignores_weight_scale(seed in any::<u64>(), scale in 0.05f64..1.0, rho in 0.0f64..=1.0) {
        let mut rng = stream(seed);
        let x = generate_signal(24, 3, &mut rng).unwrap();
        let a = generate_matrix(30, 24, &mut rng).unwrap();
        let y = measure(&a, &x.values).unwrap();
        let cfg = RecoveryConfig { max_iters: 100, ..Default::default() };
        let w = build_weights(&x.support[..2], rho, 24).unwrap();
        let scaled = WeightVector::new(w.as_slice().iter().map(|v| v * scale).collect()).unwrap();
        let r1 = biht_psw_weighted(&a, &y, 3, &w, &cfg).unwrap();
        let r2 = biht_psw_weighted(&a, &y, 3, &scaled, &cfg).unwrap();
        let s1: Vec<usize> = (0..24).filter(|&i| r1.estimate[i] != 0.0).collect();
        let s2: Vec<usize> = (0..24).filter(|&i| r2.estimate[i] != 0.0).collect();
        prop_assert_eq!(s1, s2);
    }
}
