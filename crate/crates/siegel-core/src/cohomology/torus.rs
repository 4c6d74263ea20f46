//! Fourier model: the cohomological equation of a linear `R^d` action on a
//! torus, solved mode by mode through the algebraic Hodge inverse
//! `d₋₁ = H⁻¹ d*`, plus the Diophantine-constant scan over the dual lattice.

use nalgebra::DVector;
use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::threads;
use crate::{Result, SiegelError};

use super::forms::subsets;

/// An acting frame on the `ℓ`-torus: `d` independent vectors and the mode
/// cutoff for Fourier indices `|n|_∞ ≤ K`.
#[derive(Debug, Clone)]
pub struct TorusFrame {
    pub ambient: usize,
    pub vectors: Vec<DVector<f64>>,
    pub cutoff: u32,
}

impl TorusFrame {
    pub fn new(vectors: Vec<Vec<f64>>, cutoff: u32) -> Result<Self> {
        if vectors.is_empty() {
            return Err(SiegelError::Dimension("empty frame".into()));
        }
        let ambient = vectors[0].len();
        if vectors.iter().any(|v| v.len() != ambient) {
            return Err(SiegelError::Dimension("frame vectors of unequal length".into()));
        }
        let vecs: Vec<DVector<f64>> = vectors
            .into_iter()
            .map(|v| DVector::from_vec(v))
            .collect();
        // linear independence via the Gram determinant
        let d = vecs.len();
        let mut gram = nalgebra::DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                gram[(i, j)] = vecs[i].dot(&vecs[j]);
            }
        }
        let scale: f64 = vecs.iter().map(|v| v.norm_squared()).product();
        if gram.determinant() <= 1e-12 * scale.max(1e-300) {
            return Err(SiegelError::Domain("frame vectors are linearly dependent".into()));
        }
        Ok(Self {
            ambient,
            vectors: vecs,
            cutoff,
        })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Frame pairings `λ_m = n · V_m` of a mode.
    fn pairings(&self, n: &[i64]) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| n.iter().zip(v.iter()).map(|(&ni, &vi)| ni as f64 * vi).sum())
            .collect()
    }
}

/// A form with finitely many Fourier modes: per mode, `C(d, k)` components
/// in the subset basis of `Λ^k R^d`.
#[derive(Debug, Clone)]
pub struct TorusForm {
    pub degree: usize,
    pub modes: BTreeMap<Vec<i64>, Vec<Complex64>>,
}

impl TorusForm {
    pub fn new(degree: usize, d: usize, modes: BTreeMap<Vec<i64>, Vec<Complex64>>) -> Result<Self> {
        let expected = subsets(d, degree).len();
        if modes.values().any(|c| c.len() != expected) {
            return Err(SiegelError::Dimension(format!(
                "each mode needs {expected} components in degree {degree}"
            )));
        }
        Ok(Self { degree, modes })
    }
}

/// Solver output: the primitive plus the modes whose divisor fell below the
/// near-resonance floor.
#[derive(Debug, Clone)]
pub struct TorusSolution {
    pub primitive: TorusForm,
    pub near_resonant: Vec<Vec<i64>>,
}

/// Default divisor floor for near-resonance reporting.
pub const DIVISOR_FLOOR: f64 = 1e-14;

/// Mode-wise differential `(dη)_n = i λ_n ∧ η_n`.
pub fn torus_d(frame: &TorusFrame, form: &TorusForm) -> Result<TorusForm> {
    let d = frame.dim();
    let k = form.degree;
    if k >= d {
        return TorusForm::new(k + 1, d, BTreeMap::new());
    }
    let in_masks = subsets(d, k);
    let out_masks = subsets(d, k + 1);
    let mut modes = BTreeMap::new();
    for (n, comps) in &form.modes {
        let lambda = frame.pairings(n);
        let mut out = vec![Complex64::new(0.0, 0.0); out_masks.len()];
        for (ci, &mask) in in_masks.iter().enumerate() {
            for j in 0..d {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let below = (mask & ((1u32 << j) - 1)).count_ones();
                let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                let target = mask | (1 << j);
                let ti = out_masks.iter().position(|&m| m == target).unwrap();
                out[ti] += comps[ci] * Complex64::new(0.0, sign * lambda[j]);
            }
        }
        modes.insert(n.clone(), out);
    }
    TorusForm::new(k + 1, d, modes)
}

/// Right inverse of the differential on nonzero modes: per mode
/// `Ω_n = H_n⁻¹ d* ω_n` with `H_n = Σ_m |n·V_m|²`. Exactly resonant modes
/// (divisor 0 in floating point) abort; modes with divisor below the floor
/// are solved but reported.
pub fn torus_solve(
    frame: &TorusFrame,
    form: &TorusForm,
    divisor_floor: f64,
) -> Result<TorusSolution> {
    let d = frame.dim();
    let k = form.degree;
    if k == 0 || k > d {
        return Err(SiegelError::Dimension(format!(
            "solver needs 1 <= degree <= {d}, got {k}"
        )));
    }
    let in_masks = subsets(d, k);
    let out_masks = subsets(d, k - 1);
    let mut modes = BTreeMap::new();
    let mut near_resonant = Vec::new();
    for (n, comps) in &form.modes {
        if n.iter().all(|&v| v == 0) {
            return Err(SiegelError::Precondition {
                what: "solver input must be supported on nonzero modes".into(),
                defect: comps.iter().map(|c| c.norm()).fold(0.0, f64::max),
            });
        }
        let lambda = frame.pairings(n);
        let divisor: f64 = lambda.iter().map(|l| l * l).sum();
        if divisor == 0.0 {
            return Err(SiegelError::Resonance { mode: n.clone() });
        }
        if divisor <= divisor_floor {
            near_resonant.push(n.clone());
        }
        // d* ω contraction: (ι_λ ω)_T = Σ_{m ∉ T} sign · λ_m ω_{T ∪ {m}}
        let mut out = vec![Complex64::new(0.0, 0.0); out_masks.len()];
        for (ti, &tmask) in out_masks.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..d {
                if tmask & (1 << m) != 0 {
                    continue;
                }
                let smask = tmask | (1 << m);
                let si = in_masks.iter().position(|&x| x == smask).unwrap();
                let below = (tmask & ((1u32 << m) - 1)).count_ones();
                let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                acc += comps[si] * (sign * lambda[m]);
            }
            // d* = −i ι_λ, then H⁻¹
            out[ti] = acc * Complex64::new(0.0, -1.0) / divisor;
        }
        modes.insert(n.clone(), out);
    }
    Ok(TorusSolution {
        primitive: TorusForm::new(k - 1, d, modes)?,
        near_resonant,
    })
}

/// Empirical Diophantine constant of the frame:
/// `C_est = min_{0 < |n|_∞ ≤ K} ‖P_q n‖ · ‖n‖^τ` with `P_q` the orthogonal
/// projection onto the frame span, together with the minimizing mode.
pub fn torus_diophantine(frame: &TorusFrame, tau: f64, k: u32) -> Result<(f64, Vec<i64>)> {
    if k < 1 {
        return Err(SiegelError::Domain("cutoff K must be at least 1".into()));
    }
    let ell = frame.ambient;
    // orthonormal basis of the span by modified Gram-Schmidt
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in &frame.vectors {
        let mut w = v.clone();
        for b in &basis {
            let c = w.dot(b);
            w -= b * c;
        }
        let n = w.norm();
        if n > 0.0 {
            basis.push(w / n);
        }
    }
    // by ±symmetry scan only n with positive leading nonzero coordinate
    let firsts: Vec<i64> = (0..=k as i64).collect();
    let per_slice = threads::par_map(firsts, |n0| {
        let mut best: Option<(f64, Vec<i64>)> = None;
        let mut n = vec![-(k as i64); ell];
        n[0] = n0;
        loop {
            let leading_ok = n0 > 0 || n.iter().find(|&&v| v != 0).map_or(false, |&v| v > 0);
            if leading_ok {
                let proj: f64 = basis
                    .iter()
                    .map(|b| {
                        let p: f64 =
                            n.iter().zip(b.iter()).map(|(&ni, &bi)| ni as f64 * bi).sum();
                        p * p
                    })
                    .sum::<f64>()
                    .sqrt();
                let norm: f64 = n
                    .iter()
                    .map(|&v| (v as f64) * (v as f64))
                    .sum::<f64>()
                    .sqrt();
                let value = proj * norm.powf(tau);
                let better = match &best {
                    None => true,
                    Some((bv, bn)) => value < *bv || (value == *bv && n < *bn),
                };
                if better {
                    best = Some((value, n.clone()));
                }
            }
            // advance the tail coordinates over [−K, K]
            let mut advanced = false;
            for axis in (1..ell).rev() {
                if n[axis] < k as i64 {
                    n[axis] += 1;
                    for v in n.iter_mut().skip(axis + 1) {
                        *v = -(k as i64);
                    }
                    advanced = true;
                    break;
                }
                n[axis] = -(k as i64);
            }
            if !advanced {
                return best;
            }
        }
    });
    let mut best: Option<(f64, Vec<i64>)> = None;
    for cand in per_slice.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some((bv, bn)) => cand.0 < *bv || (cand.0 == *bv && cand.1 < *bn),
        };
        if better {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| SiegelError::Domain("no modes scanned".into()))
}

#[cfg(test)]
mod tests;
