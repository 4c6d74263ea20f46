use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub(crate) fn rand_symmetric(rng: &mut impl Rng, g: usize, scale: f64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(g, g, |_, _| rng.gen_range(-scale..scale));
    (&m + m.transpose()) * 0.5
}

pub(crate) fn rand_siegel_point(rng: &mut impl Rng, g: usize) -> SiegelPoint {
    let x = rand_symmetric(rng, g, 1.0);
    let m = DMatrix::from_fn(g, g, |_, _| rng.gen_range(-1.0..1.0));
    let y = &m * m.transpose() + DMatrix::<f64>::identity(g, g) * 0.3;
    SiegelPoint::new(x, y).unwrap()
}

/// Random well-conditioned symplectic matrix built from unipotent and
/// GL-block generators.
pub(crate) fn rand_symplectic(rng: &mut impl Rng, g: usize) -> BlockSymplectic {
    let b = rand_symmetric(rng, g, 0.8);
    let q = rand_symmetric(rng, g, 0.8);
    let u = DMatrix::<f64>::identity(g, g)
        + DMatrix::from_fn(g, g, |_, _| rng.gen_range(-0.3..0.3));
    let upper = BlockSymplectic::new(
        DMatrix::identity(g, g),
        b,
        DMatrix::zeros(g, g),
        DMatrix::identity(g, g),
    )
    .unwrap();
    let lower = BlockSymplectic::lower_unipotent(&q).unwrap();
    let uinv_t = u
        .clone()
        .try_inverse()
        .expect("perturbed identity is invertible")
        .transpose();
    let gl = BlockSymplectic::new(u, DMatrix::zeros(g, g), DMatrix::zeros(g, g), uinv_t).unwrap();
    upper.compose(&lower).unwrap().compose(&gl).unwrap()
}

/// Random element of the unitary stabilizer of `i·I_g`: `[[A, B], [−B, A]]`
/// with `A + iB` unitary.
fn rand_stabilizer(rng: &mut impl Rng, g: usize) -> BlockSymplectic {
    let m = DMatrix::from_fn(g, g, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let qr = m.qr();
    let q = qr.q();
    let a = q.map(|v| v.re);
    let b = q.map(|v| v.im);
    BlockSymplectic::new(a.clone(), b.clone(), -b, a).unwrap()
}

#[test]
fn verify_symplectic_identity_and_diagonal() {
    let id = DMatrix::<f64>::identity(4, 4);
    assert_eq!(verify_symplectic(&id).unwrap(), 0.0);

    let e = 2.0f64;
    let m = DMatrix::from_row_slice(2, 2, &[e, 0.0, 0.0, 1.0 / e]);
    assert_eq!(verify_symplectic(&m).unwrap(), 0.0);
}

#[test]
fn verify_symplectic_rejects_odd_dimension_and_flags_non_symplectic() {
    let m = DMatrix::<f64>::identity(3, 3);
    assert!(verify_symplectic(&m).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(2.0..5.0));
    assert!(verify_symplectic(&m).unwrap() > 0.1);
}

#[test]
fn mobius_inversion_fixes_i() {
    let s = BlockSymplectic::from_matrix(&DMatrix::from_row_slice(
        2,
        2,
        &[0.0, -1.0, 1.0, 0.0],
    ))
    .unwrap();
    let z = SiegelPoint::base(1);
    let w = mobius(&s, &z).unwrap();
    assert!(w.max_abs_diff(&z) < 1e-14);
}

#[test]
fn mobius_translation() {
    let t = BlockSymplectic::from_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]))
        .unwrap();
    let z = SiegelPoint::base(1);
    let w = mobius(&t, &z).unwrap();
    assert_abs_diff_eq!(w.re()[(0, 0)], 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(w.im()[(0, 0)], 1.0, epsilon = 1e-14);
}

#[test]
fn mobius_is_left_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for g in 1..=3 {
        for _ in 0..30 {
            let alpha = rand_symplectic(&mut rng, g);
            let beta = rand_symplectic(&mut rng, g);
            let z = rand_siegel_point(&mut rng, g);
            let lhs = mobius(&alpha.compose(&beta).unwrap(), &z).unwrap();
            let rhs = mobius(&alpha, &mobius(&beta, &z).unwrap()).unwrap();
            assert!(
                lhs.max_abs_diff(&rhs) < 1e-9,
                "associativity defect {} at g={}",
                lhs.max_abs_diff(&rhs),
                g
            );
        }
    }
}

#[test]
fn mobius_kernel_is_plus_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let alpha = rand_symplectic(&mut rng, 2);
    let neg = BlockSymplectic::from_matrix(&(-alpha.to_matrix())).unwrap();
    let z = rand_siegel_point(&mut rng, 2);
    let a = mobius(&alpha, &z).unwrap();
    let b = mobius(&neg, &z).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-11);
}

#[test]
fn height_raw_basics() {
    assert_abs_diff_eq!(height_raw(&SiegelPoint::base(3)), 1.0, epsilon = 1e-14);

    let y = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
    let x = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.1, -0.2]);
    let z = SiegelPoint::new(x, y).unwrap();
    assert_abs_diff_eq!(height_raw(&z), 6.0, epsilon = 1e-12);
}

#[test]
fn height_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in 1..=3 {
        for _ in 0..50 {
            let beta = rand_symplectic(&mut rng, g);
            let z = rand_siegel_point(&mut rng, g);
            let zc = z.to_complex();
            let den = beta.block_c().map(|v| Complex64::new(v, 0.0)) * &zc
                + beta.block_d().map(|v| Complex64::new(v, 0.0));
            let det = den.determinant().norm_sqr();
            let hz = height_raw(&z);
            let hbz = height_raw(&mobius(&beta, &z).unwrap());
            assert!(
                (hbz * det - hz).abs() <= 1e-10 * hz.abs().max(1.0),
                "covariance defect g={g}"
            );
        }
    }
}

#[test]
fn stabilizer_fixes_height_at_base_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for g in 1..=3 {
        for _ in 0..20 {
            let kappa = rand_stabilizer(&mut rng, g);
            let w = mobius(&kappa, &SiegelPoint::base(g)).unwrap();
            assert!((height_raw(&w) - 1.0).abs() < 1e-10);
            assert!(w.max_abs_diff(&SiegelPoint::base(g)) < 1e-10);
        }
    }
}

#[test]
fn iwasawa_base_point() {
    let iw = iwasawa(&SiegelPoint::base(3)).unwrap();
    assert!(iw.x.amax() == 0.0);
    assert!((iw.w - DMatrix::<f64>::identity(3, 3)).amax() == 0.0);
    for i in 0..3 {
        assert_eq!(iw.d[i], 1.0);
    }
}

#[test]
fn iwasawa_worked_example() {
    let y = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
    let z = SiegelPoint::new(DMatrix::zeros(2, 2), y).unwrap();
    let iw = iwasawa(&z).unwrap();
    assert_abs_diff_eq!(iw.d[0], 2.0, epsilon = 1e-14);
    assert_abs_diff_eq!(iw.d[1], 0.5, epsilon = 1e-14);
    assert_abs_diff_eq!(iw.w[(0, 1)], 0.5, epsilon = 1e-14);
}

#[test]
fn iwasawa_roundtrip_and_det() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..100 {
        let g = rng.gen_range(1..=3);
        let z = rand_siegel_point(&mut rng, g);
        let iw = iwasawa(&z).unwrap();
        let back = iw.reconstruct().unwrap();
        assert!(back.max_abs_diff(&z) < 1e-10);

        let det_d: f64 = (0..g).map(|i| iw.d[i]).product();
        let det_y = z.im().determinant();
        assert!((det_d - det_y).abs() <= 1e-10 * det_y.abs());
    }
}

#[test]
fn cartan_matrix_basics() {
    let dir = CartanDirection::new(vec![1.0]).unwrap();
    let id = cartan_matrix(&dir, 0.0);
    assert!((id.to_matrix() - DMatrix::<f64>::identity(2, 2)).amax() == 0.0);

    let m = cartan_matrix(&dir, 1.0);
    assert_abs_diff_eq!(m.to_matrix()[(0, 0)], std::f64::consts::E, epsilon = 1e-14);
    assert_abs_diff_eq!(
        m.to_matrix()[(1, 1)],
        1.0 / std::f64::consts::E,
        epsilon = 1e-14
    );
    assert!(verify_symplectic(&m.to_matrix()).unwrap() < 1e-12);
}

#[test]
fn cartan_group_law() {
    let dir = CartanDirection::new(vec![0.7, 0.2]).unwrap();
    let (s, t) = (0.43, -0.91);
    let lhs = cartan_matrix(&dir, s).to_matrix() * cartan_matrix(&dir, t).to_matrix();
    let rhs = cartan_matrix(&dir, s + t).to_matrix();
    assert!((lhs - rhs).amax() < 1e-12);
}

#[test]
fn path_length_constant_is_zero() {
    let z = SiegelPoint::base(2);
    let path = vec![z.clone(), z.clone(), z];
    assert_eq!(path_length(&path).unwrap(), 0.0);
}

#[test]
fn path_length_vertical_segment_matches_hyperbolic_distance() {
    // g = 1 oracle: d(i, ie) = arcosh(1 + |z1−z0|² / (2 y0 y1)) = 1.
    let n = 4000;
    let path: Vec<SiegelPoint> = (0..=n)
        .map(|k| {
            let y = ((k as f64 / n as f64) * 1.0).exp();
            SiegelPoint::new(DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, y)).unwrap()
        })
        .collect();
    let len = path_length(&path).unwrap();
    assert_abs_diff_eq!(len, 1.0, epsilon = 1e-6);
}

#[test]
fn path_length_mobius_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let alpha = rand_symplectic(&mut rng, 2);
    let z0 = rand_siegel_point(&mut rng, 2);
    let z1 = rand_siegel_point(&mut rng, 2);
    let n = 2000;
    let path: Vec<SiegelPoint> = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            SiegelPoint::new(
                z0.re() * (1.0 - s) + z1.re() * s,
                z0.im() * (1.0 - s) + z1.im() * s,
            )
            .unwrap()
        })
        .collect();
    let moved: Vec<SiegelPoint> = path.iter().map(|z| mobius(&alpha, z).unwrap()).collect();
    let l0 = path_length(&path).unwrap();
    let l1 = path_length(&moved).unwrap();
    assert!((l0 - l1).abs() < 2e-5 * l0.max(1.0), "l0={l0} l1={l1}");
}

#[test]
fn path_length_rejects_coarse_paths() {
    let z0 = SiegelPoint::base(1);
    let z1 = SiegelPoint::new(DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, 4.0)).unwrap();
    match path_length(&[z0, z1]) {
        Err(SiegelError::RefinementRequired { .. }) => {}
        other => panic!("expected refinement error, got {other:?}"),
    }
}

#[test]
fn mobius_singular_cocycle_detected() {
    // α sends Z to −Z⁻¹; evaluate where CZ + D = Z is nearly singular.
    let s = BlockSymplectic::from_matrix(&DMatrix::from_row_slice(
        2,
        2,
        &[0.0, -1.0, 1.0, 0.0],
    ))
    .unwrap();
    let z = SiegelPoint::new(
        DMatrix::from_element(1, 1, 1e-15),
        DMatrix::from_element(1, 1, 1e-15),
    );
    // The point itself is fine; the cocycle is tiny hence ill-conditioned
    // relative to cutoff only in norm, so use a wider spread instead.
    let z = match z {
        Ok(z) => z,
        Err(_) => return,
    };
    // |det Z| ~ 1e-15 gives cond(Z) ≈ 1 but solve is still fine; build a
    // genuinely ill-conditioned 2x2 case instead.
    let _ = mobius(&s, &z);
    let y = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
    let zz = SiegelPoint::new(DMatrix::zeros(2, 2), y).unwrap();
    let s2 = BlockSymplectic::from_matrix(&{
        let mut m = DMatrix::zeros(4, 4);
        m.view_mut((0, 2), (2, 2))
            .copy_from(&(-DMatrix::<f64>::identity(2, 2)));
        m.view_mut((2, 0), (2, 2))
            .copy_from(&DMatrix::<f64>::identity(2, 2));
        m
    })
    .unwrap();
    match mobius(&s2, &zz) {
        Err(SiegelError::SingularCocycle { .. }) => {}
        other => panic!("expected singular cocycle, got {other:?}"),
    }
}

#[test]
fn siegel_point_json_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let z = rand_siegel_point(&mut rng, 2);
    let s = serde_json::to_string(&z).unwrap();
    assert!(s.contains("\"x\""));
    let back: SiegelPoint = serde_json::from_str(&s).unwrap();
    assert!(z.max_abs_diff(&back) < 1e-15);
}
