use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::SiegelError;

use super::*;

fn golden_frame(k: u32) -> TorusFrame {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    TorusFrame::new(vec![vec![1.0, phi]], k).unwrap()
}

#[test]
fn frame_requires_independence() {
    assert!(TorusFrame::new(vec![vec![1.0, 2.0], vec![2.0, 4.0]], 10).is_err());
    assert!(TorusFrame::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 10).is_ok());
}

#[test]
fn single_mode_division() {
    // ℓ = 2, d = 1, golden line: top-degree 1-form reduces to division by iλ
    let frame = golden_frame(10);
    let n = vec![3i64, -2];
    let fval = Complex64::new(0.7, -0.4);
    let mut modes = BTreeMap::new();
    modes.insert(n.clone(), vec![fval]);
    let form = TorusForm::new(1, 1, modes).unwrap();
    let sol = torus_solve(&frame, &form, DIVISOR_FLOOR).unwrap();
    let lambda = 3.0 - 2.0 * (1.0 + 5f64.sqrt()) / 2.0;
    let expect = fval / Complex64::new(0.0, lambda);
    let got = sol.primitive.modes[&n][0];
    assert!((got - expect).norm() < 1e-14);
    assert!(sol.near_resonant.is_empty());
}

#[test]
fn full_frame_divisor_is_mode_norm() {
    // d = ℓ, V_i = e_i: divisor = |n|²
    let frame = TorusFrame::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 10).unwrap();
    let n = vec![3i64, 4];
    let mut modes = BTreeMap::new();
    // 1-form with components (f_1, f_2)
    modes.insert(n.clone(), vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    let form = TorusForm::new(1, 2, modes).unwrap();
    let sol = torus_solve(&frame, &form, DIVISOR_FLOOR).unwrap();
    // Ω_n = −i (λ·f)/|n|², here λ = n
    let expect = (Complex64::new(3.0, 0.0) + Complex64::new(0.0, 4.0))
        * Complex64::new(0.0, -1.0)
        / 25.0;
    assert!((sol.primitive.modes[&n][0] - expect).norm() < 1e-15);
}

#[test]
fn solver_inverts_differential_per_mode() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let frame = TorusFrame::new(vec![vec![1.0, phi, 0.3], vec![0.0, 1.0, -1.2]], 10).unwrap();
    // closed 1-form per mode: d of a random 0-form
    let mut modes0 = BTreeMap::new();
    for n in [vec![1i64, 0, 2], vec![-2, 3, 1], vec![4, -1, 0]] {
        modes0.insert(n, vec![Complex64::new(0.3, 0.8)]);
    }
    let zero_form = TorusForm::new(0, 2, modes0).unwrap();
    let omega = torus_d(&frame, &zero_form).unwrap();
    let sol = torus_solve(&frame, &omega, DIVISOR_FLOOR).unwrap();
    let back = torus_d(&frame, &sol.primitive).unwrap();
    for (n, comps) in &omega.modes {
        for (i, c) in comps.iter().enumerate() {
            let defect = (back.modes[n][i] - c).norm();
            assert!(defect < 1e-12 * c.norm().max(1.0), "mode {n:?}: {defect}");
        }
    }
}

#[test]
fn resonant_mode_is_an_error() {
    // V = (1, 1/2): mode (1, −2) pairs to zero
    let frame = TorusFrame::new(vec![vec![1.0, 0.5]], 10).unwrap();
    let mut modes = BTreeMap::new();
    modes.insert(vec![1i64, -2], vec![Complex64::new(1.0, 0.0)]);
    let form = TorusForm::new(1, 1, modes).unwrap();
    match torus_solve(&frame, &form, DIVISOR_FLOOR) {
        Err(SiegelError::Resonance { mode }) => assert_eq!(mode, vec![1, -2]),
        other => panic!("expected resonance error, got {other:?}"),
    }
}

#[test]
fn near_resonant_modes_are_reported() {
    let frame = TorusFrame::new(vec![vec![1.0, 0.5 + 1e-9]], 10).unwrap();
    let mut modes = BTreeMap::new();
    modes.insert(vec![1i64, -2], vec![Complex64::new(1.0, 0.0)]);
    let form = TorusForm::new(1, 1, modes).unwrap();
    let sol = torus_solve(&frame, &form, 1e-14).unwrap();
    assert_eq!(sol.near_resonant, vec![vec![1, -2]]);
}

#[test]
fn zero_mode_rejected() {
    let frame = golden_frame(10);
    let mut modes = BTreeMap::new();
    modes.insert(vec![0i64, 0], vec![Complex64::new(1.0, 0.0)]);
    let form = TorusForm::new(1, 1, modes).unwrap();
    assert!(matches!(
        torus_solve(&frame, &form, DIVISOR_FLOOR),
        Err(SiegelError::Precondition { .. })
    ));
}

#[test]
fn diophantine_constant_golden_line_stays_positive() {
    // badly approximable direction: C_est stable as K doubles
    let mut last = None;
    for k in [1250u32, 2500, 5000, 10_000] {
        let frame = golden_frame(k);
        let (c, _mode) = torus_diophantine(&frame, 1.0, k).unwrap();
        assert!(c > 0.3, "K={k}: C_est {c}");
        if let Some(prev) = last {
            let ratio: f64 = c / prev;
            assert!(ratio > 0.8, "C_est collapsed between doublings: {ratio}");
        }
        last = Some(c);
    }
}

#[test]
fn diophantine_constant_vanishes_for_resonant_frame() {
    // V = e₁ in ℓ = 2: mode (0, 1) kills the constant as K grows
    let frame = TorusFrame::new(vec![vec![1.0, 0.0]], 10).unwrap();
    let (c, mode) = torus_diophantine(&frame, 1.0, 10).unwrap();
    assert_eq!(c, 0.0);
    assert_eq!(mode, vec![0, 1]);
}

#[test]
fn diophantine_constant_monotone_in_tau() {
    let frame = golden_frame(50);
    let (c1, _) = torus_diophantine(&frame, 1.0, 50).unwrap();
    let (c2, _) = torus_diophantine(&frame, 1.5, 50).unwrap();
    assert!(c2 >= c1);
}
