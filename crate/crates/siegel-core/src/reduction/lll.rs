//! Gram-matrix LLL for small positive definite forms.

use nalgebra::{DMatrix, DVector};

/// LLL reduction of a positive definite Gram matrix `Y`.
///
/// Returns unimodular `(U, U⁻¹)` with `UᵀYU` LLL-reduced (δ = 0.99). The
/// inverse is tracked through the elementary column operations, so it is
/// exact over the integers.
pub fn lll_reduce_gram(y: &DMatrix<f64>) -> (DMatrix<i64>, DMatrix<i64>) {
    let g = y.nrows();
    let mut u = DMatrix::<i64>::identity(g, g);
    let mut uinv = DMatrix::<i64>::identity(g, g);
    if g < 2 {
        return (u, uinv);
    }
    let delta = 0.99;
    let uf = |u: &DMatrix<i64>| u.map(|v| v as f64);

    let mut k = 1usize;
    let mut guard = 0usize;
    while k < g {
        guard += 1;
        if guard > 10_000 {
            break;
        }
        let gram = uf(&u).transpose() * y * uf(&u);
        let (mu, b2) = gso(&gram);

        // size-reduce column k against j < k
        let mut changed = false;
        for j in (0..k).rev() {
            let gram = uf(&u).transpose() * y * uf(&u);
            let (mu, _) = gso(&gram);
            let q = mu[(k, j)].round();
            if q != 0.0 {
                let qi = q as i64;
                for r in 0..g {
                    let v = u[(r, j)] * qi;
                    u[(r, k)] -= v;
                }
                for c in 0..g {
                    let v = uinv[(k, c)] * qi;
                    uinv[(j, c)] += v;
                }
                changed = true;
            }
        }
        let gram = if changed {
            uf(&u).transpose() * y * uf(&u)
        } else {
            gram
        };
        let (mu2, b2) = if changed { gso(&gram) } else { (mu, b2) };

        // Lovász condition
        if b2[k] >= (delta - mu2[(k, k - 1)] * mu2[(k, k - 1)]) * b2[k - 1] {
            k += 1;
        } else {
            u.swap_columns(k, k - 1);
            uinv.swap_rows(k, k - 1);
            k = k.max(2) - 1;
        }
    }
    (u, uinv)
}

/// Gram-Schmidt data from a Gram matrix: `mu[(i,j)]` for `i > j` and the
/// squared norms of the orthogonalized vectors.
fn gso(gram: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let g = gram.nrows();
    let mut mu = DMatrix::<f64>::identity(g, g);
    let mut b2 = DVector::<f64>::zeros(g);
    // r[(i,j)] = <b_i, b*_j>
    let mut r = DMatrix::<f64>::zeros(g, g);
    for i in 0..g {
        for j in 0..=i {
            let mut v = gram[(i, j)];
            for k in 0..j {
                v -= mu[(i, k)] * r[(j, k)];
            }
            r[(i, j)] = v;
            if i == j {
                b2[i] = v;
            } else if b2[j] != 0.0 {
                mu[(i, j)] = v / b2[j];
            }
        }
    }
    (mu, b2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reduces_skewed_gram() {
        // Gram of the basis {(1, 0), (100, 1)} in the plane
        let y = DMatrix::from_row_slice(2, 2, &[1.0, 100.0, 100.0, 10001.0]);
        let (u, uinv) = lll_reduce_gram(&y);
        let prod = &u * &uinv;
        assert_eq!(prod, DMatrix::<i64>::identity(2, 2));
        let uf = u.map(|v| v as f64);
        let red = uf.transpose() * &y * uf;
        assert!(red[(0, 0)] <= 1.0 + 1e-9);
        assert!(red[(0, 1)].abs() <= 0.5 + 1e-9);
    }

    #[test]
    fn unimodular_and_reduced_on_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let g = rng.gen_range(2..=3);
            let m = DMatrix::from_fn(g, g, |_, _| rng.gen_range(-3.0..3.0));
            let y = &m * m.transpose() + DMatrix::<f64>::identity(g, g) * 0.01;
            let (u, uinv) = lll_reduce_gram(&y);
            assert_eq!(&u * &uinv, DMatrix::<i64>::identity(g, g));
            let uf = u.map(|v| v as f64);
            let red = uf.transpose() * &y * uf;
            // size-reduction bound
            for i in 1..g {
                for j in 0..i {
                    let (mu, _) = super::gso(&red);
                    assert!(mu[(i, j)].abs() <= 0.5 + 1e-6);
                }
            }
        }
    }
}
