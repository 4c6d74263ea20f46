use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cohomology::hermite::{
    extend_e, integrate_i, primitive_p, HermiteField, HermiteTruncation,
};
use crate::SiegelError;

use super::*;

fn trunc(g: usize, a: usize, h: f64) -> HermiteTruncation {
    HermiteTruncation::new(g, a, h).unwrap()
}

#[test]
fn d_squared_vanishes_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (d, g, k) in [(2usize, 2usize, 0usize), (3, 3, 1), (2, 3, 0)] {
        let omega = random_form(&mut rng, d, k, trunc(g, 16, 1.0), 14).unwrap();
        let dd = differential(&differential(&omega).unwrap()).unwrap();
        // zero up to the non-associativity of float addition
        let rel = dd.l2_norm() / omega.l2_norm();
        assert!(rel < 1e-13, "d∘d relative residual {rel}");
    }
}

#[test]
fn peel_extend_is_identity_on_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let eta = random_form(&mut rng, 1, 0, trunc(1, 16, 1.0), 16).unwrap();
    let back = peel_i(&extend_back(&eta, 16).unwrap()).unwrap();
    let defect = back.sub(&eta).unwrap().l2_norm();
    assert!(defect < 1e-14 * eta.l2_norm().max(1e-300));
}

#[test]
fn homotopy_identity_on_band_limited_forms() {
    // 1 − E·I = dK + Kd, relative residual ≤ 1e-8, 50 random 1-forms,
    // d = 2, g = 2, cutoff 64, band-limited to half the cutoff
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let t = trunc(2, 64, 1.0);
    for i in 0..50 {
        let omega = random_form(&mut rng, 2, 1, t, 32).unwrap();
        let lhs = omega.sub(&extend_back(&peel_i(&omega).unwrap(), 64).unwrap()).unwrap();
        let k_domega = homotopy_k(&differential(&omega).unwrap()).unwrap();
        let d_komega = differential(&homotopy_k(&omega).unwrap()).unwrap();
        let rhs = d_komega.add(&k_domega).unwrap();
        let res = lhs.sub(&rhs).unwrap().l2_norm() / omega.l2_norm().max(1e-300);
        assert!(res < 1e-8, "sample {i}: homotopy residual {res}");
    }
}

#[test]
fn homotopy_applies_primitive_directly_when_integral_vanishes() {
    // ω with I₁ω = 0: Kω = P applied to the dx_0 coefficient
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let t = trunc(2, 32, 1.0);
    let mut omega = random_form(&mut rng, 2, 1, t, 16).unwrap();
    // kill the axis-0 integral of the dx_0 component
    let f = &omega.comps[0];
    let centered = f
        .sub(&extend_e(&integrate_i(f, 1).unwrap(), 1, 32).unwrap())
        .unwrap();
    omega.comps[0] = centered.clone();
    let k = homotopy_k(&omega).unwrap();
    let direct = primitive_p(&centered).unwrap();
    let defect = k.comps[0].sub(&direct).unwrap().l2_norm();
    assert!(defect < 1e-12 * centered.l2_norm().max(1e-300));
}

#[test]
fn homotopy_squared_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let omega = random_form(&mut rng, 2, 2, trunc(2, 32, 1.0), 16).unwrap();
    let kk = homotopy_k(&homotopy_k(&omega).unwrap()).unwrap();
    assert_eq!(kk.l2_norm(), 0.0);
}

#[test]
fn primitive_right_inverse_below_top_degree() {
    // ω = dΩ' for random band-limited Ω', k = 1, d = 2, g = 2
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let t = trunc(2, 64, 1.0);
    for _ in 0..10 {
        let seed_form = random_form(&mut rng, 2, 0, t, 24).unwrap();
        let omega = differential(&seed_form).unwrap();
        let prim = d_minus_one(&omega).unwrap();
        let res = differential(&prim)
            .unwrap()
            .sub(&omega)
            .unwrap()
            .l2_norm()
            / omega.l2_norm().max(1e-300);
        assert!(res < 1e-8, "residual {res}");
    }
}

#[test]
fn primitive_right_inverse_at_top_degree() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for (d, g) in [(1usize, 1usize), (2, 2), (2, 3)] {
        let t = trunc(g, 48, 1.0);
        let raw = random_form(&mut rng, d, d, t, 20).unwrap();
        let omega = project_m(&raw).unwrap();
        let prim = d_minus_one(&omega).unwrap();
        let res = differential(&prim)
            .unwrap()
            .sub(&omega)
            .unwrap()
            .l2_norm()
            / omega.l2_norm().max(1e-300);
        assert!(res < 1e-8, "d={d} g={g} residual {res}");
    }
}

#[test]
fn top_degree_primitive_of_gaussian_derivative() {
    // d = g = 1: ω = (−x e^{−x²/2}) dx has primitive e^{−x²/2}
    let t = trunc(1, 64, 1.0);
    let mut f = HermiteField::zeros(t);
    f.coeffs[1] = Complex64::new(
        -std::f64::consts::PI.powf(0.25) / std::f64::consts::SQRT_2,
        0.0,
    );
    let omega = PForm::top(1, f);
    let prim = d_minus_one(&omega).unwrap();
    assert!((prim.comps[0].coeffs[0].re - std::f64::consts::PI.powf(0.25)).abs() < 1e-12);
}

#[test]
fn obstruction_is_rejected_with_unit_defect() {
    // ω = φ_g dx₁∧…∧dx_g has I_g ω = 1
    for g in 1..=2usize {
        let t = trunc(g, 16, 1.0);
        let omega = PForm::top(g, HermiteField::gaussian(t));
        match d_minus_one(&omega) {
            Err(SiegelError::Precondition { defect, .. }) => {
                assert!((defect - 1.0).abs() < 1e-12, "defect {defect}")
            }
            other => panic!("expected obstruction rejection, got {other:?}"),
        }
    }
}

#[test]
fn closedness_precondition_reports_defect() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let omega = random_form(&mut rng, 2, 1, trunc(2, 16, 1.0), 8).unwrap();
    match d_minus_one(&omega) {
        Err(SiegelError::Precondition { defect, .. }) => assert!(defect > 1e-6),
        other => panic!("expected closedness rejection, got {other:?}"),
    }
}

#[test]
fn projection_fixes_closed_forms_and_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let t = trunc(2, 48, 1.0);
    // closed form below top degree: M ω = ω
    let seed_form = random_form(&mut rng, 2, 0, t, 20).unwrap();
    let closed = differential(&seed_form).unwrap();
    let m = project_m(&closed).unwrap();
    let defect = m.sub(&closed).unwrap().l2_norm() / closed.l2_norm();
    assert!(defect < 1e-9, "M on closed forms: {defect}");

    // idempotence on random forms
    for _ in 0..30 {
        let omega = random_form(&mut rng, 2, 1, t, 20).unwrap();
        let m1 = project_m(&omega).unwrap();
        let m2 = project_m(&m1).unwrap();
        let defect = m2.sub(&m1).unwrap().l2_norm() / m1.l2_norm().max(1e-300);
        assert!(defect < 1e-9, "idempotence defect {defect}");
        // the projection output is closed
        let dm = differential(&m1).unwrap().l2_norm() / m1.l2_norm().max(1e-300);
        assert!(dm < 1e-9, "projection not closed: {dm}");
    }
    for _ in 0..30 {
        let omega = random_form(&mut rng, 2, 2, t, 20).unwrap();
        let m1 = project_m(&omega).unwrap();
        let m2 = project_m(&m1).unwrap();
        let defect = m2.sub(&m1).unwrap().l2_norm() / m1.l2_norm().max(1e-300);
        assert!(defect < 1e-12, "top idempotence defect {defect}");
    }
}

#[test]
fn pure_obstruction_projects_to_zero() {
    // ω = φ_g dx (g = d = 1): E I φ_g = φ_g, so M ω = 0
    let t = trunc(1, 16, 1.0);
    let omega = PForm::top(1, HermiteField::gaussian(t));
    let m = project_m(&omega).unwrap();
    assert!(m.l2_norm() < 1e-15);
}

#[test]
fn tame_ratio_single_mode_closed_form() {
    // one-mode closed 1-form at k = 1 = d: the ratio is computable from the
    // eigenvalues: ‖P f‖_s / ‖f‖_{s+r} for f = ψ_1 dx, P ψ_1 = −√2 ψ_0 + tail
    let t = trunc(1, 64, 1.0);
    let mut f = HermiteField::zeros(t);
    f.coeffs[1] = Complex64::new(1.0, 0.0);
    let omega = PForm::top(1, f.clone());
    let prim = d_minus_one(&omega).unwrap();
    let s = 1.0;
    let r = 1.1; // (k+1)/2 + 0.1
    let num = prim.sobolev_norm(s);
    let den = omega.sobolev_norm(s + r);
    // eigen route: the primitive is concentrated on ψ_0 with weight √2
    let expect_num = (2.0f64) * (1.0f64).powf(s); // |−√2|² λ_0^s, λ_0 = 1
    let expect_den = 3.0f64.powf(s + r); // λ_1 = 3
    let expect = (expect_num.sqrt()) / expect_den.sqrt();
    assert!(
        ((num / den) - expect).abs() < 1e-10,
        "ratio {} vs {}",
        num / den,
        expect
    );
}

#[test]
fn tame_ratio_statistics_run_deterministically() {
    let cfg = TameRatioConfig {
        s: 1.0,
        k: 1,
        d: 2,
        g: 2,
        eps: 0.1,
        n_samples: 10,
        seed: 7,
        cutoff: 32,
        band: 12,
        h: 1.0,
    };
    let a = tame_ratio(&cfg).unwrap();
    let b = tame_ratio(&cfg).unwrap();
    assert_eq!(a.max_ratio, b.max_ratio);
    assert!(a.max_ratio.is_finite() && a.max_ratio > 0.0);
    assert!(a.median_ratio <= a.max_ratio);
}

#[test]
fn tame_ratio_h_compensation_is_uniform() {
    let base = TameRatioConfig {
        s: 1.0,
        k: 1,
        d: 2,
        g: 2,
        eps: 0.1,
        n_samples: 10,
        seed: 7,
        cutoff: 32,
        band: 12,
        h: 1.0,
    };
    let r1 = tame_ratio(&base).unwrap();
    let mut cfg2 = base.clone();
    cfg2.h = 2.0 * std::f64::consts::PI;
    let r2 = tame_ratio(&cfg2).unwrap();
    // the raw ratio scales as |h|^{−(r+1)/2}; the compensated constant is flat
    assert!(
        (r2.max_compensated / r1.max_compensated - 1.0).abs() < 1e-9,
        "{} vs {}",
        r2.max_compensated,
        r1.max_compensated
    );
    assert!(r2.max_ratio < r1.max_ratio);
}
