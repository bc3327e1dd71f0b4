use std::f64::consts::PI;

use freqcause::bc::{bc_test_at, f_distribution_sf};
use freqcause::bootstrap::{empirical_quantile, replicate_rng, stationary_bootstrap};
use freqcause::filters::hp_filter;
use freqcause::spectra::{
    conditional_gc, spectral_matrix, unconditional_gc, Orientation,
};
use freqcause::var::{companion_roots, fit_var, fit_var_from, VarModel};
use freqcause::MultiSeries;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Random stationary VAR with a random positive definite covariance.
fn random_model(seed: u64, p: usize, k: usize) -> VarModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let coefs: Vec<DMatrix<f64>> = (0..k)
            .map(|_| DMatrix::from_fn(p, p, |_, _| rng.random_range(-0.6..0.6) / k as f64))
            .collect();
        let b = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        let sigma = &b * b.transpose() + DMatrix::identity(p, p) * 0.1;
        let m = VarModel::from_parts(coefs, sigma).unwrap();
        if companion_roots(&m).is_stationary() {
            return m;
        }
    }
}

fn min_hermitian_eigenvalue(h: &DMatrix<Complex64>) -> f64 {
    let p = h.nrows();
    let real = DMatrix::from_fn(2 * p, 2 * p, |i, j| {
        let z = h[(i % p, j % p)];
        match (i < p, j < p) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    SymmetricEigen::new(real).eigenvalues.min()
}

fn noise_panel(seed: u64, p: usize, len: usize) -> MultiSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (0..p)
        .map(|_| (0..len).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    MultiSeries::from_columns(cols).unwrap()
}

/// `(I + λ D'D)` assembled densely.
fn dense_hp(y: &[f64], lambda: f64) -> Vec<f64> {
    let n = y.len();
    let d = DMatrix::from_fn(n - 2, n, |i, j| match j.wrapping_sub(i) {
        0 | 2 => 1.0,
        1 => -2.0,
        _ => 0.0,
    });
    let a = DMatrix::identity(n, n) + d.transpose() * d * lambda;
    a.lu().solve(&DVector::from_column_slice(y)).unwrap().iter().copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_matrix_is_hermitian_psd(seed in any::<u64>(), p in 2usize..=3, k in 1usize..=3) {
        let m = random_model(seed, p, k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        for _ in 0..8 {
            let omega = rng.random_range(-PI..PI);
            let h = spectral_matrix(&m, omega).unwrap();
            let herm = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(herm < 1e-10);
            prop_assert!(min_hermitian_eigenvalue(&h) > -1e-10);
        }
    }

    #[test]
    fn unconditional_is_nonnegative_and_symmetric(seed in any::<u64>(), k in 1usize..=3) {
        let m = random_model(seed, 2, k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        for _ in 0..8 {
            let omega = rng.random_range(0.0..PI);
            for o in [Orientation::XY, Orientation { effect: 1, cause: 0 }] {
                let a = unconditional_gc(&m, omega, o).unwrap();
                let b = unconditional_gc(&m, 2.0 * PI - omega, o).unwrap();
                prop_assert!(a >= 0.0);
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_cause_coefficients_give_zero(seed in any::<u64>(), k in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefs = (0..k)
            .map(|_| {
                let mut a = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-0.3..0.3));
                a[(0, 1)] = 0.0;
                a
            })
            .collect();
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![rng.random_range(0.1..5.0), rng.random_range(0.1..5.0)]));
        let m = VarModel::from_parts(coefs, sigma).unwrap();
        for i in 0..16 {
            let omega = i as f64 * PI / 15.0;
            prop_assert!(unconditional_gc(&m, omega, Orientation::XY).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn fitted_conditional_is_nonnegative_and_symmetric(seed in any::<u64>(), k2 in 1usize..=3, k3 in 1usize..=3) {
        let data = noise_panel(seed, 3, 120);
        let start = k2.max(k3);
        let xw = fit_var_from(&data.select(&[0, 2]).unwrap(), k2, true, start).unwrap();
        let xyw = fit_var_from(&data, k3, true, start).unwrap();
        for i in 1..=12 {
            let omega = i as f64 * PI / 12.0;
            let a = conditional_gc(&xw, &xyw, omega).unwrap();
            let b = conditional_gc(&xw, &xyw, 2.0 * PI - omega).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn fitted_sigma_is_symmetric_psd(seed in any::<u64>(), k in 1usize..=4, intercept in any::<bool>()) {
        let data = noise_panel(seed, 3, 80);
        let m = fit_var(&data, k, intercept).unwrap();
        let s = m.sigma();
        prop_assert_eq!(s.clone(), s.transpose());
        prop_assert!(SymmetricEigen::new(s.clone()).eigenvalues.min() > 0.0);
        prop_assert_eq!(m.n_obs(), 80 - k);
    }

    #[test]
    fn hp_matches_dense_solve(seed in any::<u64>(), len in 4usize..120, log_lambda in -2.0f64..5.0) {
        let y: Vec<f64> = noise_panel(seed, 1, len).column(0).to_vec();
        let lambda = 10f64.powf(log_lambda);
        let hp = hp_filter(&y, lambda).unwrap();
        let oracle = dense_hp(&y, lambda);
        for (a, b) in hp.trend.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        for ((t, c), v) in hp.trend.iter().zip(&hp.cycle).zip(&y) {
            prop_assert!((t + c - v).abs() <= 1e-9 * v.abs().max(1.0));
        }
    }

    #[test]
    fn hp_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let data = noise_panel(seed, 2, 60);
        let (x, y) = (data.column(0), data.column(1));
        let mix: Vec<f64> = x.iter().zip(y).map(|(u, v)| a * u + b * v).collect();
        let (tx, ty, tm) = (
            hp_filter(x, 1600.0).unwrap().trend,
            hp_filter(y, 1600.0).unwrap().trend,
            hp_filter(&mix, 1600.0).unwrap().trend,
        );
        for i in 0..60 {
            prop_assert!((tm[i] - (a * tx[i] + b * ty[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn bootstrap_values_come_from_input(seed in any::<u64>(), len in 2usize..200, l in 1.0f64..20.0) {
        let x: Vec<f64> = (0..len).map(|i| i as f64).collect();
        let mut rng = replicate_rng(seed, 0);
        let out = stationary_bootstrap(&x, l, &mut rng);
        prop_assert_eq!(out.len(), len);
        prop_assert!(out.iter().all(|v| x.contains(v)));
        let mut again = replicate_rng(seed, 0);
        prop_assert_eq!(out, stationary_bootstrap(&x, l, &mut again));
    }

    #[test]
    fn quantile_is_monotone_sample_member(v in prop::collection::vec(-1e3f64..1e3, 1..200), q1 in 0.01f64..0.99, q2 in 0.01f64..0.99) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let a = empirical_quantile(&v, lo).unwrap();
        let b = empirical_quantile(&v, hi).unwrap();
        prop_assert!(v.contains(&a));
        prop_assert!(a <= b);
    }

    #[test]
    fn f_survival_is_monotone(x in 0.0f64..50.0, dx in 0.01f64..10.0, d1 in 1u32..10, d2 in 1u32..400) {
        let a = f_distribution_sf(x, d1 as f64, d2 as f64).unwrap();
        let b = f_distribution_sf(x + dx, d1 as f64, d2 as f64).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn bc_statistic_is_scale_invariant(seed in any::<u64>(), scale in 0.01f64..100.0, k in 2usize..=4) {
        let data = noise_panel(seed, 2, 100);
        let (x, y) = (data.column(0), data.column(1));
        let xs: Vec<f64> = x.iter().map(|v| v * scale).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * scale).collect();
        let omegas = [0.0, 0.4, 1.3, 2.9, PI];
        let a = bc_test_at(x, y, None, k, &omegas).unwrap();
        let b = bc_test_at(&xs, &ys, None, k, &omegas).unwrap();
        for (fa, fb) in a.f_statistics.iter().zip(&b.f_statistics) {
            prop_assert!((fa - fb).abs() <= 1e-8 * fa.abs().max(1.0));
        }
    }
}
