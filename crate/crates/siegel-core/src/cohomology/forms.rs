//! Hermite-valued differential forms on the acting directions, the
//! differential, the homotopy operator, the right inverse of the
//! differential, the coboundary projections, and the empirical tame-ratio
//! experiment.
//!
//! Components are indexed by strictly increasing subsets of `{0..d−1}` held
//! as bitmasks in ascending order. The differential inserts axes with the
//! usual alternating signs; with the conventions here the homotopy identity
//! reads `1 − E·I = d∘K + K∘d` and the reassembly of a primitive is
//! `Ω = Kω − Eη` with `dη = Iω`.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::threads;
use crate::{Result, SiegelError};

use super::hermite::{
    apply_ddx, extend_e, integrate_i, primitive_p, sobolev_norm, HermiteField, HermiteTruncation,
};

/// A form of degree `k` on a `d`-dimensional acting frame with Hermite-field
/// coefficients.
#[derive(Debug, Clone)]
pub struct PForm {
    pub d: usize,
    pub k: usize,
    /// One field per strictly increasing index subset, in ascending bitmask
    /// order.
    pub comps: Vec<HermiteField>,
}

/// Subsets of `{0..d-1}` of size `k` as ascending bitmasks.
pub(crate) fn subsets(d: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize == k {
            out.push(mask);
        }
    }
    out
}

fn subset_rank(d: usize, k: usize, mask: u32) -> usize {
    subsets(d, k)
        .iter()
        .position(|&m| m == mask)
        .expect("mask must be a valid k-subset")
}

/// Sign of inserting axis `j` into the sorted subset `mask`:
/// `(−1)^{#{s ∈ mask : s < j}}`.
fn insertion_sign(mask: u32, j: usize) -> f64 {
    let below = (mask & ((1u32 << j) - 1)).count_ones();
    if below % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl PForm {
    pub fn zeros(d: usize, k: usize, trunc: HermiteTruncation) -> Result<Self> {
        if k > d || d > trunc.g {
            return Err(SiegelError::Dimension(format!(
                "invalid form shape: k = {k}, d = {d}, g = {}",
                trunc.g
            )));
        }
        let comps = subsets(d, k)
            .iter()
            .map(|_| HermiteField::zeros(trunc))
            .collect();
        Ok(Self { d, k, comps })
    }

    pub fn from_components(d: usize, k: usize, comps: Vec<HermiteField>) -> Result<Self> {
        if comps.len() != subsets(d, k).len() {
            return Err(SiegelError::Dimension(format!(
                "degree-{k} form on {d} directions needs C(d,k) components"
            )));
        }
        if comps.windows(2).any(|w| w[0].trunc != w[1].trunc) {
            return Err(SiegelError::Dimension(
                "all components must share one truncation".into(),
            ));
        }
        Ok(Self { d, k, comps })
    }

    /// A top-degree form from its single component.
    pub fn top(d: usize, f: HermiteField) -> Self {
        Self {
            d,
            k: d,
            comps: vec![f],
        }
    }

    pub fn trunc(&self) -> HermiteTruncation {
        self.comps[0].trunc
    }

    pub fn component(&self, mask: u32) -> &HermiteField {
        &self.comps[subset_rank(self.d, self.k, mask)]
    }

    /// Euclidean norm over components of the `s`-Sobolev norms.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.comps
            .iter()
            .map(|f| {
                let v = sobolev_norm(f, s);
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.d != rhs.d || self.k != rhs.k {
            return Err(SiegelError::Dimension("form shape mismatch".into()));
        }
        let comps = self
            .comps
            .iter()
            .zip(&rhs.comps)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: self.d,
            k: self.k,
            comps,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            d: self.d,
            k: self.k,
            comps: self.comps.iter().map(|f| f.scale(factor)).collect(),
        }
    }

    pub fn max_loss(&self) -> f64 {
        self.comps.iter().map(|f| f.loss).fold(0.0, f64::max)
    }

    pub fn band_limited(&self, band: usize) -> Self {
        Self {
            d: self.d,
            k: self.k,
            comps: self.comps.iter().map(|f| f.band_limited(band)).collect(),
        }
    }
}

/// Exterior differential: `dω = Σ_j X_j ∧ ω` with `X_j = |h|^{1/2} ∂_j`
/// acting along the frame directions. `d∘d = 0` exactly in coefficient
/// arithmetic.
pub fn differential(omega: &PForm) -> Result<PForm> {
    if omega.k >= omega.d {
        // no (k+1)-subsets: the zero form with an empty component list
        return Ok(PForm {
            d: omega.d,
            k: omega.k + 1,
            comps: Vec::new(),
        });
    }
    let d = omega.d;
    let k = omega.k;
    let mut out = PForm::zeros(d, k + 1, omega.trunc())?;
    let in_masks = subsets(d, k);
    for (ci, &mask) in in_masks.iter().enumerate() {
        for j in 0..d {
            if mask & (1 << j) != 0 {
                continue;
            }
            let target = mask | (1 << j);
            let sign = insertion_sign(mask, j);
            let deriv = apply_ddx(&omega.comps[ci], j)?.scale(Complex64::new(sign, 0.0));
            let ti = subset_rank(d, k + 1, target);
            out.comps[ti] = out.comps[ti].add(&deriv)?;
        }
    }
    Ok(out)
}

/// Peels the first direction: monomials divisible by `dx_0` lose it and get
/// integrated along axis 0; the rest map to zero. Lands in the
/// `(d−1, g−1)`-complex.
pub fn peel_i(omega: &PForm) -> Result<PForm> {
    let d = omega.d;
    let k = omega.k;
    if d == 0 || k == 0 {
        return Err(SiegelError::Dimension("nothing to peel".into()));
    }
    let trunc = omega.trunc();
    let out_trunc = HermiteTruncation {
        g: trunc.g - 1,
        cutoff: trunc.cutoff,
        h: trunc.h,
    };
    let mut out = PForm::zeros(d - 1, k - 1, out_trunc)?;
    for (ci, &mask) in subsets(d, k).iter().enumerate() {
        if mask & 1 == 0 {
            continue;
        }
        let shifted = (mask & !1) >> 1;
        let ti = subset_rank(d - 1, k - 1, shifted);
        out.comps[ti] = integrate_i(&omega.comps[ci], 1)?;
    }
    Ok(out)
}

/// Gaussian extension back into the `(d, g)`-complex: `η ↦ φ(x_0) dx_0 ∧ η`.
pub fn extend_back(eta: &PForm, cutoff: usize) -> Result<PForm> {
    let d = eta.d + 1;
    let k = eta.k + 1;
    let trunc = eta.trunc();
    let out_trunc = HermiteTruncation {
        g: trunc.g + 1,
        cutoff,
        h: trunc.h,
    };
    let mut out = PForm::zeros(d, k, out_trunc)?;
    for (ci, &mask) in subsets(d - 1, k - 1).iter().enumerate() {
        let target = (mask << 1) | 1;
        let ti = subset_rank(d, k, target);
        out.comps[ti] = extend_e(&eta.comps[ci], 1, cutoff)?;
    }
    Ok(out)
}

/// Homotopy operator: on monomials divisible by the first direction applies
/// `P ∘ (1 − E_1 I_1)` to the coefficient, else 0. Satisfies
/// `1 − E·I = dK + Kd` on band-limited forms.
pub fn homotopy_k(omega: &PForm) -> Result<PForm> {
    let d = omega.d;
    let k = omega.k;
    if k == 0 {
        return Err(SiegelError::Dimension("homotopy needs degree >= 1".into()));
    }
    let mut out = PForm::zeros(d, k - 1, omega.trunc())?;
    for (ci, &mask) in subsets(d, k).iter().enumerate() {
        if mask & 1 == 0 {
            continue;
        }
        let f = &omega.comps[ci];
        let avg = extend_e(&integrate_i(f, 1)?, 1, f.trunc.cutoff)?;
        let centered = f.sub(&avg)?;
        let prim = primitive_p(&centered)?;
        let ti = subset_rank(d, k - 1, mask & !1);
        out.comps[ti] = prim;
    }
    Ok(out)
}

/// Right inverse of the differential.
///
/// For `k < d` requires `dω = 0`; at top degree `k = d` requires the moment
/// `I_{d,g} ω = 0`. Follows the first-direction peeling recursion:
/// `Ω = Kω − E η` with `dη = I ω`, reduced to the constrained primitive in
/// the base case. On violated preconditions the error reports the pairing
/// defect with the obstructing invariant current.
pub fn d_minus_one(omega: &PForm) -> Result<PForm> {
    let d = omega.d;
    let k = omega.k;
    if k == 0 || k > d {
        return Err(SiegelError::Dimension(format!(
            "no primitive for degree {k} on {d} directions"
        )));
    }
    if k < d {
        let closedness = differential(omega)?.l2_norm();
        if closedness > 1e-9 * omega.l2_norm().max(1.0) {
            return Err(SiegelError::Precondition {
                what: "d_minus_one below top degree requires a closed form".into(),
                defect: closedness,
            });
        }
    } else {
        let moment = integrate_i(&omega.comps[0], d)?;
        let defect = moment.l2_norm();
        if defect > 1e-9 * omega.l2_norm().max(1.0) {
            return Err(SiegelError::Precondition {
                what: "top-degree form pairs nontrivially with the invariant current".into(),
                defect,
            });
        }
    }
    solve_recursive(omega)
}

fn solve_recursive(omega: &PForm) -> Result<PForm> {
    let d = omega.d;
    let k = omega.k;
    if k == 1 && d == 1 {
        // single component f dx_0; the primitive is the constrained solve
        return Ok(PForm {
            d,
            k: 0,
            comps: vec![primitive_p(&omega.comps[0])?],
        });
    }
    if k == 1 && d > 1 {
        // I omega vanishes for closed 1-forms; the homotopy alone inverts d
        return homotopy_k(omega);
    }
    let reduced = peel_i(omega)?;
    let eta = solve_recursive(&reduced)?;
    let back = extend_back(&eta, omega.trunc().cutoff)?;
    homotopy_k(omega)?.sub(&back)
}

/// Projection onto coboundaries: `M^k ω = ω − d₋₁(dω)` for `k < d` and
/// `M^d ω = ω − E_{d,g} I_{d,g} ω` at top degree. Restricted to coboundaries
/// it is the identity; `M∘M = M`.
pub fn project_m(omega: &PForm) -> Result<PForm> {
    let d = omega.d;
    let k = omega.k;
    if k == d {
        let f = &omega.comps[0];
        let avg = extend_e(&integrate_i(f, d)?, d, f.trunc.cutoff)?;
        return Ok(PForm::top(d, f.sub(&avg)?));
    }
    let domega = differential(omega)?;
    let back = solve_recursive(&domega)?;
    omega.sub(&back)
}

/// Configuration of the tame-ratio experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TameRatioConfig {
    pub s: f64,
    pub k: usize,
    pub d: usize,
    pub g: usize,
    pub eps: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub cutoff: usize,
    /// Band limit of the sampled forms (defaults to half the cutoff).
    pub band: usize,
    pub h: f64,
}

/// Ratio statistics of `‖d₋₁ω‖_s / ‖ω‖_{s+(k+1)/2+ε}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TameRatioStats {
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// Ratios rescaled by `|h|^{(r+1)/2}`, `r = (k+1)/2 + ε`: the measured
    /// tame constant, which the uniformity-in-h statement is about.
    pub max_compensated: f64,
    pub median_compensated: f64,
    pub source_norm_order: f64,
}

/// Samples random closed (or moment-free top-degree) band-limited forms and
/// measures the tame ratio of the solver.
pub fn tame_ratio(cfg: &TameRatioConfig) -> Result<TameRatioStats> {
    if cfg.k == 0 || cfg.k > cfg.d || cfg.d > cfg.g {
        return Err(SiegelError::Dimension("need 1 <= k <= d <= g".into()));
    }
    let trunc = HermiteTruncation::new(cfg.g, cfg.cutoff, cfg.h)?;
    let source_order = cfg.s + (cfg.k as f64 + 1.0) / 2.0 + cfg.eps;
    let idx: Vec<usize> = (0..cfg.n_samples).collect();
    let ratios: Vec<Result<f64>> = threads::par_map(idx, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64 + 1);
        let omega = sample_closed_form(&mut rng, cfg, trunc)?;
        let primitive = d_minus_one(&omega)?;
        Ok(primitive.sobolev_norm(cfg.s) / omega.sobolev_norm(source_order))
    });
    let mut vals = Vec::with_capacity(ratios.len());
    for r in ratios {
        vals.push(r?);
    }
    let mut sorted = vals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let comp = cfg.h.abs().powf((source_order - cfg.s + 1.0) / 2.0);
    let median = sorted[sorted.len() / 2];
    let max = *sorted.last().unwrap();
    Ok(TameRatioStats {
        max_ratio: max,
        median_ratio: median,
        max_compensated: max * comp,
        median_compensated: median * comp,
        source_norm_order: source_order,
    })
}

/// A random closed band-limited `k`-form: `dΩ'` of a random `(k−1)`-form for
/// `k < d` (band shrunk by one so the derivative is exact), and a
/// moment-corrected random form at top degree.
fn sample_closed_form(
    rng: &mut impl Rng,
    cfg: &TameRatioConfig,
    trunc: HermiteTruncation,
) -> Result<PForm> {
    if cfg.band + 1 >= cfg.cutoff {
        return Err(SiegelError::Domain("band must stay below the cutoff".into()));
    }
    if cfg.k < cfg.d {
        let seed_form = random_form(rng, cfg.d, cfg.k - 1, trunc, cfg.band)?;
        differential(&seed_form)
    } else {
        let raw = random_form(rng, cfg.d, cfg.d, trunc, cfg.band)?;
        project_m(&raw)
    }
}

pub fn random_form(
    rng: &mut impl Rng,
    d: usize,
    k: usize,
    trunc: HermiteTruncation,
    band: usize,
) -> Result<PForm> {
    let mut form = PForm::zeros(d, k, trunc)?;
    for comp in form.comps.iter_mut() {
        for flat in 0..comp.coeffs.len() {
            if comp.multi_index(flat).iter().all(|&a| a < band) {
                comp.coeffs[flat] =
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
    }
    Ok(form)
}

#[cfg(test)]
mod tests;
