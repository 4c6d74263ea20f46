//! The Hermite model of the Schrödinger representation: truncated
//! coefficient tensors, ladder operators, homogeneous Sobolev norms, the
//! integration and Gaussian-extension maps, the constrained primitive, the
//! metaplectic dilation, and invariant currents.
//!
//! Convention: the basis functions are the L²-orthonormal eigenfunctions of
//! `x² − d²/dx²` with eigenvalues `2n + 1`. All ladder constants follow:
//!   x ψ_n  = √(n/2) ψ_{n−1} + √((n+1)/2) ψ_{n+1}
//!   ψ_n'   = √(n/2) ψ_{n−1} − √((n+1)/2) ψ_{n+1}
//! The representation scales both by `|h|^{1/2}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::OnceLock;

use crate::{Result, SiegelError};

/// Largest per-axis cutoff the constant tables cover.
pub const MAX_CUTOFF: usize = 4096;

/// Integrals `d_m = ∫ ψ_m` and derived constants, computed once by the
/// parity recurrence `d_{m+1} = √(m/(m+1)) d_{m−1}`, `d_0 = √2 π^{1/4}`,
/// and validated against 200-node Gauss–Hermite quadrature; a mismatch
/// aborts the process.
pub fn hermite_integrals() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut d = vec![0.0; MAX_CUTOFF];
        d[0] = std::f64::consts::SQRT_2 * std::f64::consts::PI.powf(0.25);
        if MAX_CUTOFF > 1 {
            d[1] = 0.0;
        }
        for m in 1..MAX_CUTOFF - 1 {
            d[m + 1] = (m as f64 / (m + 1) as f64).sqrt() * d[m - 1];
        }
        validate_against_quadrature(&d);
        d
    })
}

/// 200-node Gauss–Hermite check of the integral table (exact for m < 400).
fn validate_against_quadrature(d: &[f64]) {
    let n = 200;
    let (nodes, weights) = gauss_hermite(n);
    let m_max = (2 * n - 1).min(d.len());
    // polynomial parts of ψ_m at √2·u, by the three-term recurrence
    let mut quad = vec![0.0; m_max];
    for (&u, &w) in nodes.iter().zip(weights.iter()) {
        let y = std::f64::consts::SQRT_2 * u;
        let mut p_prev = 0.0;
        let mut p = std::f64::consts::PI.powf(-0.25);
        for (m, q) in quad.iter_mut().enumerate() {
            *q += w * p;
            let p_next = y * (2.0 / (m as f64 + 1.0)).sqrt() * p
                - (m as f64 / (m as f64 + 1.0)).sqrt() * p_prev;
            p_prev = p;
            p = p_next;
        }
    }
    for (m, q) in quad.iter_mut().enumerate() {
        *q *= std::f64::consts::SQRT_2;
        let reference = d[m];
        assert!(
            (*q - reference).abs() <= 1e-12 * reference.abs().max(1.0),
            "Hermite integral table failed quadrature validation at m = {m}: \
             recurrence {reference:.17e}, quadrature {q:.17e}"
        );
    }
}

/// Gauss–Hermite nodes and weights (weight e^{−u²}): eigenvalues of the
/// Jacobi matrix polished by Newton iteration, weights by the Christoffel
/// sum of squared orthonormal polynomials.
pub(crate) fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut nodes: Vec<f64> = (0..n).map(|i| eig.eigenvalues[i]).collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // orthonormal Hermite polynomials w.r.t. e^{−x²} and the running sum of
    // squares for the Christoffel weight
    let eval = |x: f64| -> (f64, f64, f64) {
        let mut p_prev = 0.0f64;
        let mut p = std::f64::consts::PI.powf(-0.25);
        let mut sumsq = p * p;
        for k in 0..n {
            let p_next = x * (2.0 / (k as f64 + 1.0)).sqrt() * p
                - (k as f64 / (k as f64 + 1.0)).sqrt() * p_prev;
            p_prev = p;
            p = p_next;
            if k + 1 < n {
                sumsq += p * p;
            }
        }
        // p = H̃_n, p_prev = H̃_{n−1}; H̃_n' = √(2n) H̃_{n−1}
        let dp = (2.0 * n as f64).sqrt() * p_prev;
        (p, dp, sumsq)
    };
    let mut weights = Vec::with_capacity(n);
    for node in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp, _) = eval(*node);
            if dp != 0.0 {
                *node -= p / dp;
            }
        }
        let (_, _, sumsq) = eval(*node);
        weights.push(1.0 / sumsq);
    }
    (nodes, weights)
}

/// Hermite coefficient of the mass-one Gaussian `φ_1 = (2π)^{−1/2} e^{−x²/2}`
/// on mode 0 (all other modes vanish). Chosen as `1/d_0` so that
/// `I ∘ E = id` holds exactly in floating point.
pub fn gaussian_coefficient() -> f64 {
    1.0 / hermite_integrals()[0]
}

/// Truncation parameters of a Hermite coefficient tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteTruncation {
    /// Number of axes (0 means the scalar space `S(R^0) = C`).
    pub g: usize,
    /// Per-axis mode bound `A`: indices `a_i ∈ [0, A)`.
    pub cutoff: usize,
    /// Representation parameter; nonzero.
    pub h: f64,
}

impl HermiteTruncation {
    pub fn new(g: usize, cutoff: usize, h: f64) -> Result<Self> {
        if g > 0 && cutoff < 4 {
            return Err(SiegelError::Domain("cutoff must be at least 4".into()));
        }
        if cutoff > MAX_CUTOFF {
            return Err(SiegelError::Domain(format!(
                "cutoff exceeds table limit {MAX_CUTOFF}"
            )));
        }
        if h == 0.0 || !h.is_finite() {
            return Err(SiegelError::Domain("h must be finite and nonzero".into()));
        }
        Ok(Self { g, cutoff, h })
    }

    pub fn len(&self) -> usize {
        self.cutoff.pow(self.g as u32).max(1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn drop_axes(&self, d: usize) -> Self {
        Self {
            g: self.g - d,
            cutoff: self.cutoff,
            h: self.h,
        }
    }

    fn add_axes(&self, d: usize, cutoff: usize) -> Self {
        Self {
            g: self.g + d,
            cutoff,
            h: self.h,
        }
    }
}

/// A truncated Hermite-coefficient tensor representing a Schwartz function.
///
/// Coefficients are stored in lexicographic multi-index order (axis 0
/// slowest). `loss` carries an a-posteriori estimate of the coefficient mass
/// operators would have written beyond the cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteField {
    pub trunc: HermiteTruncation,
    pub coeffs: Vec<Complex64>,
    pub loss: f64,
}

impl HermiteField {
    pub fn zeros(trunc: HermiteTruncation) -> Self {
        let n = trunc.len();
        Self {
            trunc,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
            loss: 0.0,
        }
    }

    pub fn from_coeffs(trunc: HermiteTruncation, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != trunc.len() {
            return Err(SiegelError::Dimension(format!(
                "expected {} coefficients, got {}",
                trunc.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SiegelError::Domain("non-finite coefficient".into()));
        }
        Ok(Self {
            trunc,
            coeffs,
            loss: 0.0,
        })
    }

    /// Scalar element of `S(R^0) = C`.
    pub fn scalar(h: f64, value: Complex64) -> Self {
        Self {
            trunc: HermiteTruncation { g: 0, cutoff: 0, h },
            coeffs: vec![value],
            loss: 0.0,
        }
    }

    /// The mass-one Gaussian `φ_g` (mode 0 on every axis).
    pub fn gaussian(trunc: HermiteTruncation) -> Self {
        let mut f = Self::zeros(trunc);
        f.coeffs[0] = Complex64::new(gaussian_coefficient().powi(trunc.g as i32), 0.0);
        f
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multi-index of the flat position (axis 0 slowest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let a = self.trunc.cutoff.max(1);
        let mut idx = vec![0usize; self.trunc.g];
        for i in (0..self.trunc.g).rev() {
            idx[i] = flat % a;
            flat /= a;
        }
        idx
    }

    /// Total degree `|a|` of the flat position.
    fn total_degree(&self, mut flat: usize) -> usize {
        let a = self.trunc.cutoff.max(1);
        let mut sum = 0;
        for _ in 0..self.trunc.g {
            sum += flat % a;
            flat /= a;
        }
        sum
    }

    /// Eigenvalue of the scaled sub-Laplacian on the flat position:
    /// `|h| (2|a| + g)`.
    pub fn eigenvalue(&self, flat: usize) -> f64 {
        self.trunc.h.abs() * (2.0 * self.total_degree(flat) as f64 + self.trunc.g as f64)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.trunc != rhs.trunc {
            return Err(SiegelError::Dimension("truncation mismatch".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            trunc: self.trunc,
            coeffs,
            loss: self.loss + rhs.loss,
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        Ok(self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))?)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            loss: self.loss * factor.norm(),
        }
    }

    /// Band-limits to multi-indices with every `a_i < band`.
    pub fn band_limited(&self, band: usize) -> Self {
        let mut out = self.clone();
        for (flat, c) in out.coeffs.iter_mut().enumerate() {
            if self.multi_index(flat).iter().any(|&a| a >= band) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// Iterates over all 1-D lines along `axis`, calling `f` with (base offset,
/// stride).
fn for_each_line(trunc: &HermiteTruncation, axis: usize, mut f: impl FnMut(usize, usize)) {
    let a = trunc.cutoff;
    let g = trunc.g;
    let stride = a.pow((g - 1 - axis) as u32);
    let outer = a.pow(axis as u32);
    let inner = stride;
    for o in 0..outer {
        for i in 0..inner {
            f(o * a * stride + i, stride);
        }
    }
}

/// Homogeneous Sobolev norm `(Σ_a (|h|(2|a|+g))^s |f_a|²)^{1/2}`.
///
/// For the scalar space (`g = 0`) this is the modulus, independent of `s`.
pub fn sobolev_norm(f: &HermiteField, s: f64) -> f64 {
    if f.trunc.g == 0 {
        return f.coeffs[0].norm();
    }
    f.coeffs
        .iter()
        .enumerate()
        .map(|(flat, c)| f.eigenvalue(flat).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Representation operator `|h|^{1/2} x_k` (two-band coupling).
pub fn apply_x(f: &HermiteField, axis: usize) -> Result<HermiteField> {
    ladder(f, axis, 1.0)
}

/// Representation operator `|h|^{1/2} ∂/∂x_k` (two-band coupling with the
/// sign flip on the raising branch).
pub fn apply_ddx(f: &HermiteField, axis: usize) -> Result<HermiteField> {
    ladder(f, axis, -1.0)
}

fn ladder(f: &HermiteField, axis: usize, raise_sign: f64) -> Result<HermiteField> {
    let g = f.trunc.g;
    if axis >= g {
        return Err(SiegelError::Dimension(format!("axis {axis} out of range")));
    }
    let a = f.trunc.cutoff;
    let scale = f.trunc.h.abs().sqrt();
    let mut out = HermiteField::zeros(f.trunc);
    out.loss = f.loss;
    let mut dropped = 0.0f64;
    for_each_line(&f.trunc, axis, |base, stride| {
        // out[n] = scale * ( sqrt((n+1)/2) f[n+1] + raise_sign * sqrt(n/2) f[n-1] )
        for n in 0..a {
            let mut v = Complex64::new(0.0, 0.0);
            if n + 1 < a {
                v += f.coeffs[base + (n + 1) * stride] * ((n as f64 + 1.0) / 2.0).sqrt();
            }
            if n > 0 {
                v += f.coeffs[base + (n - 1) * stride]
                    * (raise_sign * (n as f64 / 2.0).sqrt());
            }
            out.coeffs[base + n * stride] = v * scale;
        }
        // the coefficient that would land on mode A
        let top = f.coeffs[base + (a - 1) * stride].norm() * (a as f64 / 2.0).sqrt() * scale;
        dropped += top * top;
    });
    out.loss += dropped.sqrt();
    Ok(out)
}

/// Integration over the first `d` axes:
/// `(I_{d,g} f)(y) = ∫ f(x, y) dx`, in coefficients a contraction with the
/// integral weights `d_m` per integrated axis.
pub fn integrate_i(f: &HermiteField, d: usize) -> Result<HermiteField> {
    let g = f.trunc.g;
    if d > g {
        return Err(SiegelError::Dimension("cannot integrate more axes than g".into()));
    }
    if d == 0 {
        return Ok(f.clone());
    }
    let table = hermite_integrals();
    let a = f.trunc.cutoff;
    let rest = a.pow((g - d) as u32);
    let mut out = if g == d {
        HermiteField::scalar(f.trunc.h, Complex64::new(0.0, 0.0))
    } else {
        HermiteField::zeros(f.trunc.drop_axes(d))
    };
    out.loss = f.loss;
    // weights over the leading block of d axes
    let lead = a.pow(d as u32);
    for block in 0..lead {
        let mut w = 1.0;
        let mut tmp = block;
        for _ in 0..d {
            w *= table[tmp % a];
            tmp /= a;
        }
        if w == 0.0 {
            continue;
        }
        let base = block * rest;
        for r in 0..rest {
            out.coeffs[r] += f.coeffs[base + r] * w;
        }
    }
    Ok(out)
}

/// Gaussian extension `(E_{d,g} f)(x, y) = φ_d(x) f(y)`; the left inverse of
/// `integrate_i` (`I ∘ E = id`, exact in coefficient arithmetic).
pub fn extend_e(f: &HermiteField, d: usize, cutoff: usize) -> Result<HermiteField> {
    if d == 0 {
        return Ok(f.clone());
    }
    if f.trunc.g > 0 && cutoff != f.trunc.cutoff {
        return Err(SiegelError::Dimension("cutoff mismatch in extension".into()));
    }
    let out_trunc = if f.trunc.g == 0 {
        HermiteTruncation::new(d, cutoff, f.trunc.h)?
    } else {
        f.trunc.add_axes(d, cutoff)
    };
    let mut out = HermiteField::zeros(out_trunc);
    out.loss = f.loss;
    let c = Complex64::new(gaussian_coefficient().powi(d as i32), 0.0);
    let rest = f.trunc.len();
    for r in 0..rest {
        out.coeffs[r] = f.coeffs[r] * c;
    }
    Ok(out)
}

/// Constrained primitive along axis 0: solves `X_1 u = f` in coefficient
/// space (`X_1 = |h|^{1/2} ∂_1`), requiring the axis integral of `f` to
/// vanish. The odd chain of each line is determined by forward recursion;
/// the even chain's free constant is closed by the moment identity
/// `∫ u dx_1 = −∫ x_1 f dx_1`.
pub fn primitive_p(f: &HermiteField) -> Result<HermiteField> {
    let g = f.trunc.g;
    if g == 0 {
        return Err(SiegelError::Dimension("primitive needs at least one axis".into()));
    }
    // precondition: zero axis integral
    let moment = integrate_i(f, 1)?;
    let defect = moment.l2_norm();
    if defect > 1e-10 * f.l2_norm().max(1.0) {
        return Err(SiegelError::Precondition {
            what: "primitive_p requires a vanishing axis integral".into(),
            defect,
        });
    }
    let table = hermite_integrals();
    let a = f.trunc.cutoff;
    let mut out = HermiteField::zeros(f.trunc);
    out.loss = f.loss;
    let inv_scale = 1.0 / f.trunc.h.abs().sqrt();
    let mut dropped = 0.0f64;

    // homogeneous even solution (the truncated expansion of the constant)
    let mut q = vec![0.0f64; a];
    q[0] = 1.0;
    for n in (2..a).step_by(2) {
        q[n] = ((n - 1) as f64 / n as f64).sqrt() * q[n - 2];
    }
    let dq: f64 = (0..a).step_by(2).map(|n| table[n] * q[n]).sum();

    let mut line = vec![Complex64::new(0.0, 0.0); a];
    let mut u = vec![Complex64::new(0.0, 0.0); a];
    for_each_line(&f.trunc, 0, |base, stride| {
        for (n, v) in line.iter_mut().enumerate() {
            *v = f.coeffs[base + n * stride];
        }
        for v in u.iter_mut() {
            *v = Complex64::new(0.0, 0.0);
        }
        // odd chain: equations at even rows
        // sqrt((n+1)/2) u[n+1] - sqrt(n/2) u[n-1] = line[n]
        let mut n = 0;
        while n + 1 < a {
            let mut rhs = line[n];
            if n > 0 {
                rhs += u[n - 1] * (n as f64 / 2.0).sqrt();
            }
            u[n + 1] = rhs / (((n + 1) as f64) / 2.0).sqrt();
            n += 2;
        }
        // even chain: particular solution with u[0] = 0, equations at odd rows
        let mut n = 1;
        while n + 1 < a {
            let rhs = line[n] + u[n - 1] * (n as f64 / 2.0).sqrt();
            u[n + 1] = rhs / (((n + 1) as f64) / 2.0).sqrt();
            n += 2;
        }
        // moment closure: <d, u> = -<d, x·line> fixes the constant
        let mut m1 = Complex64::new(0.0, 0.0);
        for n in 0..a {
            // (x line)_n contracted with d_n: only even n contribute
            if n % 2 == 0 && table[n] != 0.0 {
                let mut xv = Complex64::new(0.0, 0.0);
                if n + 1 < a {
                    xv += line[n + 1] * ((n as f64 + 1.0) / 2.0).sqrt();
                }
                if n > 0 {
                    xv += line[n - 1] * (n as f64 / 2.0).sqrt();
                }
                m1 += xv * table[n];
            }
        }
        let mut du = Complex64::new(0.0, 0.0);
        for n in (0..a).step_by(2) {
            du += u[n] * table[n];
        }
        let c = (-m1 - du) / dq;
        for n in (0..a).step_by(2) {
            u[n] += c * q[n];
        }
        // the residual of the topmost equation is the would-be coefficient
        let top_eq = a - 1;
        let mut res = line[top_eq];
        if top_eq > 0 {
            res += u[top_eq - 1] * (top_eq as f64 / 2.0).sqrt();
        }
        let would_write = res / ((a as f64) / 2.0).sqrt();
        dropped += would_write.norm_sqr();

        for (n, v) in u.iter().enumerate() {
            out.coeffs[base + n * stride] = *v * inv_scale;
        }
    });
    out.loss += dropped.sqrt() * inv_scale;
    Ok(out)
}

/// Dilation generator `x ∂ + 1/2 = (a² − a†²)/2` truncated to the cutoff:
/// skew-symmetric, two off-diagonals.
fn dilation_generator(a: usize) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(a, a);
    for n in 2..a {
        let v = ((n * (n - 1)) as f64).sqrt() / 2.0;
        m[(n - 2, n)] = v;
        m[(n, n - 2)] = -v;
    }
    m
}

/// One-axis dilation matrix `exp(t(x∂ + 1/2))`, orthogonal by construction.
pub fn dilation_matrix(cutoff: usize, t: f64) -> DMatrix<f64> {
    (dilation_generator(cutoff) * t).exp()
}

/// Metaplectic rescaling `U_t f(x, y) = e^{(t_1+…+t_d)/2} f(e^{t} x, y)`:
/// the unitary dilation along the first `d = t.len()` axes.
///
/// Accuracy degrades with `|t|`; above `|t|_∞ = 1` the result carries an
/// accuracy warning through an inflated loss estimate.
pub fn metaplectic_u(f: &HermiteField, t: &[f64]) -> Result<HermiteField> {
    let g = f.trunc.g;
    let d = t.len();
    if d > g {
        return Err(SiegelError::Dimension("more dilation parameters than axes".into()));
    }
    let a = f.trunc.cutoff;
    let mut out = f.clone();
    for (axis, &tk) in t.iter().enumerate() {
        if tk == 0.0 {
            continue;
        }
        let m = dilation_matrix(a, tk);
        let mut line = vec![Complex64::new(0.0, 0.0); a];
        let mut res = vec![Complex64::new(0.0, 0.0); a];
        let trunc = out.trunc;
        let mut top_mass = 0.0f64;
        let coeffs = &mut out.coeffs;
        for_each_line(&trunc, axis, |base, stride| {
            for (n, v) in line.iter_mut().enumerate() {
                *v = coeffs[base + n * stride];
            }
            for (i, r) in res.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &lv) in line.iter().enumerate() {
                    let w = m[(i, j)];
                    if w != 0.0 {
                        acc += lv * w;
                    }
                }
                *r = acc;
            }
            for (n, v) in res.iter().enumerate() {
                coeffs[base + n * stride] = *v;
            }
            // mass near the cutoff is the contaminated region
            top_mass += res[a - 1].norm_sqr() + res[a - 2].norm_sqr();
        });
        out.loss += top_mass.sqrt();
    }
    if t.iter().any(|v| v.abs() > 1.0) {
        // accuracy domain exceeded: flag through the loss channel
        out.loss = out.loss.max(1e-3);
    }
    Ok(out)
}

/// A closed invariant current `D ∘ I_{d,g}`: integration over the acting
/// axes composed with a density on the transverse factor (the scalar 1 for
/// `d = g`).
#[derive(Debug, Clone)]
pub struct InvariantCurrent {
    pub d: usize,
    /// Density over `R^{g−d}`; a scalar field when `d = g`.
    pub density: HermiteField,
}

impl InvariantCurrent {
    /// The canonical current `I_g` (density 1, `d = g`).
    pub fn canonical(d: usize, h: f64) -> Self {
        Self {
            d,
            density: HermiteField::scalar(h, Complex64::new(1.0, 0.0)),
        }
    }

    /// Bilinear pairing with a function on `R^g` (the single component of a
    /// top-degree form).
    pub fn pair(&self, f: &HermiteField) -> Result<Complex64> {
        let reduced = integrate_i(f, self.d)?;
        if reduced.trunc.g != self.density.trunc.g {
            return Err(SiegelError::Dimension(
                "current density does not match the transverse factor".into(),
            ));
        }
        Ok(reduced
            .coeffs
            .iter()
            .zip(&self.density.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Sobolev order-(−s) norm of the current as a covector.
    pub fn neg_norm(&self, s: f64, trunc: HermiteTruncation) -> Result<f64> {
        let cov = self.covector(trunc)?;
        Ok(cov
            .coeffs
            .iter()
            .enumerate()
            .map(|(flat, c)| cov.eigenvalue(flat).powf(-s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// The covector representation `k[a, b] = Π d_{a_i} · D_b`.
    pub fn covector(&self, trunc: HermiteTruncation) -> Result<HermiteField> {
        if trunc.g != self.d + self.density.trunc.g {
            return Err(SiegelError::Dimension("truncation does not match current".into()));
        }
        let table = hermite_integrals();
        let a = trunc.cutoff;
        let mut out = HermiteField::zeros(trunc);
        let rest = a.pow((trunc.g - self.d) as u32);
        let lead = a.pow(self.d as u32);
        for block in 0..lead {
            let mut w = 1.0;
            let mut tmp = block;
            for _ in 0..self.d {
                w *= table[tmp % a];
                tmp /= a;
            }
            if w == 0.0 {
                continue;
            }
            for r in 0..rest {
                out.coeffs[block * rest + r] = self.density.coeffs[r] * w;
            }
        }
        Ok(out)
    }
}

/// Band-limited measurement of the order-(−s) norm of `I_g ∘ U_t` at `g = 1`:
/// the supremum of `|I_g(U_t f)| / ‖f‖_s` over test functions band-limited
/// below `band`.
///
/// The restriction keeps the dilation exactly representable at the given
/// cutoff (band · e^{2|t|} must stay below it), so the measured ratio tracks
/// the true scaling instead of truncation noise.
pub fn flowed_current_norm(
    cutoff: usize,
    h: f64,
    s: f64,
    t: f64,
    band: usize,
) -> Result<f64> {
    if (band as f64) * (2.0 * t.abs()).exp() > cutoff as f64 {
        return Err(SiegelError::Accuracy(format!(
            "band {band} too wide for cutoff {cutoff} at t = {t}"
        )));
    }
    let table = hermite_integrals();
    let m = dilation_matrix(cutoff, t);
    let habs = h.abs();
    let mut total = 0.0;
    for a in 0..band {
        // <I, U_t psi_a> = sum_m d_m M[m, a]
        let mut c = 0.0;
        for row in 0..cutoff {
            if table[row] != 0.0 {
                c += table[row] * m[(row, a)];
            }
        }
        let lambda = habs * (2.0 * a as f64 + 1.0);
        total += c * c * lambda.powf(-s);
    }
    Ok(total.sqrt())
}
