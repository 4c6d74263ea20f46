//! Exact Heisenberg group arithmetic in the canonical and polarized models,
//! reduction modulo the standard lattice, isotropic-frame flows on the
//! nilmanifold, zero-fiber-average observables from the first-return
//! construction, and quadrature Birkhoff sums over cubes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::kahan::{tree_sum_complex, KahanComplex};
use crate::symplectic::BlockSymplectic;
use crate::theta::FourierSeries;
use crate::threads;
use crate::{Result, SiegelError};

/// Multiplication convention for group elements.
///
/// Canonical: `t'' = t + t' + (ξ·x' − ξ'·x)/2`.
/// Polarized: `t'' = t + t' + ξ·x'`.
/// The homomorphism canonical → polarized is `(x, ξ, t) ↦ (x, ξ, t + ξ·x/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Canonical,
    Polarized,
}

/// An element of the Heisenberg group over `R^g`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisElement {
    pub x: DVector<f64>,
    pub xi: DVector<f64>,
    pub t: f64,
    pub convention: Convention,
}

impl HeisElement {
    pub fn new(x: Vec<f64>, xi: Vec<f64>, t: f64, convention: Convention) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(SiegelError::Dimension("x and ξ must have equal length".into()));
        }
        Ok(Self {
            x: DVector::from_vec(x),
            xi: DVector::from_vec(xi),
            t,
            convention,
        })
    }

    pub fn identity(g: usize, convention: Convention) -> Self {
        Self {
            x: DVector::zeros(g),
            xi: DVector::zeros(g),
            t: 0.0,
            convention,
        }
    }

    pub fn genus(&self) -> usize {
        self.x.len()
    }

    /// Converts between the two models; a round trip is the identity up to
    /// one rounding of the correction term.
    pub fn convert_to(&self, target: Convention) -> Self {
        if self.convention == target {
            return self.clone();
        }
        let corr = self.xi.dot(&self.x) / 2.0;
        let t = match target {
            Convention::Polarized => self.t + corr,
            Convention::Canonical => self.t - corr,
        };
        Self {
            x: self.x.clone(),
            xi: self.xi.clone(),
            t,
            convention: target,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let dx = (&self.x - &other.x).amax();
        let dxi = (&self.xi - &other.xi).amax();
        dx.max(dxi).max((self.t - other.t).abs())
    }
}

/// Group product; both factors must share one convention.
pub fn mul(a: &HeisElement, b: &HeisElement) -> Result<HeisElement> {
    if a.convention != b.convention {
        return Err(SiegelError::Usage(
            "cannot multiply elements in different conventions".into(),
        ));
    }
    if a.genus() != b.genus() {
        return Err(SiegelError::Dimension("genus mismatch".into()));
    }
    let central = match a.convention {
        Convention::Canonical => (a.xi.dot(&b.x) - b.xi.dot(&a.x)) / 2.0,
        Convention::Polarized => a.xi.dot(&b.x),
    };
    Ok(HeisElement {
        x: &a.x + &b.x,
        xi: &a.xi + &b.xi,
        t: a.t + b.t + central,
        convention: a.convention,
    })
}

/// Group inverse.
pub fn inv(a: &HeisElement) -> HeisElement {
    let t = match a.convention {
        Convention::Canonical => -a.t,
        Convention::Polarized => -a.t + a.xi.dot(&a.x),
    };
    HeisElement {
        x: -&a.x,
        xi: -&a.xi,
        t,
        convention: a.convention,
    }
}

/// An element of the standard lattice `Z^g × Z^g × (1/2)Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeElement {
    pub n: Vec<i64>,
    pub m: Vec<i64>,
    /// Central part in half-integer units: the element is `(n, m, s/2)`.
    pub s: i64,
}

impl LatticeElement {
    pub fn to_heis(&self, convention: Convention) -> HeisElement {
        HeisElement {
            x: DVector::from_iterator(self.n.len(), self.n.iter().map(|&v| v as f64)),
            xi: DVector::from_iterator(self.m.len(), self.m.iter().map(|&v| v as f64)),
            t: self.s as f64 / 2.0,
            convention,
        }
    }
}

/// Canonical representative on the nilmanifold: `x, ξ ∈ [0,1)^g`,
/// `t ∈ [0, 1/2)` in the polarized model.
#[derive(Debug, Clone, PartialEq)]
pub struct NilPoint {
    lift: HeisElement,
}

impl NilPoint {
    pub fn identity(g: usize) -> Self {
        Self {
            lift: HeisElement::identity(g, Convention::Polarized),
        }
    }

    /// The canonical-box lift (polarized convention).
    pub fn lift(&self) -> &HeisElement {
        &self.lift
    }

    pub fn genus(&self) -> usize {
        self.lift.genus()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        // compare on the torus: coordinates are defined mod 1 (mod 1/2 in t)
        let wrap = |d: f64, period: f64| {
            let r = d.rem_euclid(period);
            r.min(period - r)
        };
        let g = self.genus();
        let mut worst: f64 = 0.0;
        for i in 0..g {
            worst = worst.max(wrap(self.lift.x[i] - other.lift.x[i], 1.0));
            worst = worst.max(wrap(self.lift.xi[i] - other.lift.xi[i], 1.0));
        }
        worst.max(wrap(self.lift.t - other.lift.t, 0.5))
    }
}

/// Reduces a polarized element to its canonical-box representative by right
/// multiplication with a standard-lattice element; returns the witness.
///
/// The quotient is by the right lattice action (`reduce(a·λ) = reduce(a)`),
/// matching the first-return relations used by the observables.
pub fn reduce(a: &HeisElement) -> Result<(NilPoint, LatticeElement)> {
    if a.convention != Convention::Polarized {
        return Err(SiegelError::Usage(
            "reduction is defined in the polarized model".into(),
        ));
    }
    let g = a.genus();
    let n: Vec<i64> = (0..g).map(|i| -(a.x[i].floor() as i64)).collect();
    let m: Vec<i64> = (0..g).map(|i| -(a.xi[i].floor() as i64)).collect();
    // a · (n, m, s/2) = (x + n, ξ + m, t + s/2 + ξ·n)
    let tau: f64 = a.t
        + (0..g).map(|i| a.xi[i] * n[i] as f64).sum::<f64>();
    let s = -(2.0 * tau).floor() as i64;
    let t = tau + s as f64 / 2.0;
    let x = DVector::from_fn(g, |i, _| a.x[i] + n[i] as f64);
    let xi = DVector::from_fn(g, |i, _| a.xi[i] + m[i] as f64);
    Ok((
        NilPoint {
            lift: HeisElement {
                x,
                xi,
                t,
                convention: Convention::Polarized,
            },
        },
        LatticeElement { n, m, s },
    ))
}

/// An isotropic frame: the first `d ≤ g` frame fields of the automorphism
/// `α`, spanning an abelian subgroup.
#[derive(Debug, Clone)]
pub struct IsotropicFrame {
    pub alpha: BlockSymplectic,
    pub d: usize,
    // columns of α⁻¹ acting on the standard basis: X_i^α = (a_tilde e_i, c_tilde e_i)
    a_tilde: DMatrix<f64>,
    c_tilde: DMatrix<f64>,
}

impl IsotropicFrame {
    pub fn new(alpha: BlockSymplectic, d: usize) -> Result<Self> {
        let g = alpha.genus();
        if d == 0 || d > g {
            return Err(SiegelError::Dimension("need 1 <= d <= g".into()));
        }
        let inv = alpha.inverse();
        let a_tilde = inv.block_a().clone();
        let c_tilde = inv.block_c().clone();
        // isotropy of the first d frame fields via the symplectic form:
        // ω(X_i, X_j) = (C̃ᵀÃ)_{ij} − (C̃ᵀÃ)_{ji}
        let cta = c_tilde.transpose() * &a_tilde;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((cta[(i, j)] - cta[(j, i)]).abs());
            }
        }
        if worst > 1e-10 * (1.0 + cta.amax()) {
            return Err(SiegelError::Domain(format!(
                "frame fields do not commute: symplectic pairing {worst:.3e}"
            )));
        }
        Ok(Self {
            alpha,
            d,
            a_tilde,
            c_tilde,
        })
    }

    /// The polarized group element `exp(x_1 X_1^α + … + x_d X_d^α)`.
    ///
    /// For a Lie algebra vector `(u, w, 0)` the polarized exponential is
    /// `(u, w, w·u/2)`; two-step nilpotency makes this exact.
    pub fn exponential(&self, x: &[f64]) -> Result<HeisElement> {
        if x.len() != self.d {
            return Err(SiegelError::Dimension("flow parameter must have length d".into()));
        }
        let g = self.alpha.genus();
        let xp = DVector::from_fn(g, |i, _| if i < self.d { x[i] } else { 0.0 });
        let u = &self.a_tilde * &xp;
        let w = &self.c_tilde * &xp;
        let t = w.dot(&u) / 2.0;
        Ok(HeisElement {
            x: u,
            xi: w,
            t,
            convention: Convention::Polarized,
        })
    }
}

/// Flow of the frame: left multiplication of the lift by the exponential,
/// then reduction. Abelian in the parameter.
pub fn flow(frame: &IsotropicFrame, m: &NilPoint, x: &[f64]) -> Result<NilPoint> {
    let e = frame.exponential(x)?;
    let moved = mul(&e, m.lift())?;
    Ok(reduce(&moved)?.0)
}

/// Compactly supported bump profile: the normalized plateau
/// `(1 − (u/ε)²)^order` per axis, unit mass, support radius `ε < 1/2` in
/// the sup norm. `order ≥ 3` gives a C² profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub radius: f64,
    pub order: u32,
    norm_1d: f64,
}

impl Bump {
    pub fn new(radius: f64, order: u32) -> Result<Self> {
        if !(radius > 0.0 && radius < 0.5) {
            return Err(SiegelError::Domain("bump radius must lie in (0, 1/2)".into()));
        }
        if order < 2 {
            return Err(SiegelError::Domain("bump order must be at least 2".into()));
        }
        // ∫_{−1}^{1} (1 − s²)^k ds by the downward recurrence I_k = I_{k−1}·2k/(2k+1)
        let mut integral = 2.0;
        for k in 1..=order {
            integral *= 2.0 * k as f64 / (2.0 * k as f64 + 1.0);
        }
        Ok(Self {
            radius,
            order,
            norm_1d: 1.0 / (radius * integral),
        })
    }

    /// One-axis profile value.
    fn eval_1d(&self, u: f64) -> f64 {
        let s = u / self.radius;
        if s.abs() >= 1.0 {
            return 0.0;
        }
        (1.0 - s * s).powi(self.order as i32) * self.norm_1d
    }

    /// Product profile on `R^g`.
    pub fn eval(&self, u: &DVector<f64>) -> f64 {
        u.iter().map(|&v| self.eval_1d(v)).product()
    }

    /// Quadrature check of the unit mass (test support).
    pub fn mass_1d(&self, nodes: usize) -> f64 {
        let (xs, ws) = gauss_legendre(nodes);
        xs.iter()
            .zip(&ws)
            .map(|(&x, &w)| w * self.radius * self.eval_1d(self.radius * x))
            .sum()
    }
}

/// A zero-fiber-average observable built from the first-return data of the
/// frame `[[I, 0], [Q, I]]`: bump profile on the base, zero-mean circle
/// factor along the center.
#[derive(Debug, Clone)]
pub struct Observable {
    pub q: DMatrix<f64>,
    pub bump: Bump,
    pub phi: FourierSeries,
}

impl Observable {
    pub fn new(q: DMatrix<f64>, bump: Bump, phi: FourierSeries) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(SiegelError::Dimension("Q must be square".into()));
        }
        if (&q - q.transpose()).amax() > 1e-12 * (1.0 + q.amax()) {
            return Err(SiegelError::Domain("Q must be symmetric".into()));
        }
        Ok(Self { q, bump, phi })
    }

    pub fn genus(&self) -> usize {
        self.q.nrows()
    }

    /// Evaluation through the first-return decomposition:
    /// `Σ_n ψ(x + n) φ(t_dec + ξ_decᵀ n + nᵀQn/2)` with
    /// `ξ_dec = ξ + Qx`, `t_dec = t + xᵀQx/2` of the polarized lift.
    pub fn eval(&self, m: &NilPoint) -> Complex64 {
        self.eval_lift(m.lift())
    }

    /// Evaluation at an arbitrary polarized lift; invariant under right
    /// lattice translations of the lift.
    pub fn eval_lift(&self, lift: &HeisElement) -> Complex64 {
        let g = self.genus();
        let x = &lift.x;
        let xi_dec = &lift.xi + &self.q * x;
        let t_dec = lift.t + (x.dot(&(&self.q * x))) / 2.0;
        // support box: |x_i + n_i| <= radius
        let lo: Vec<i64> = (0..g)
            .map(|i| (-self.bump.radius - x[i]).ceil() as i64)
            .collect();
        let hi: Vec<i64> = (0..g)
            .map(|i| (self.bump.radius - x[i]).floor() as i64)
            .collect();
        if (0..g).any(|i| lo[i] > hi[i]) {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut n: Vec<i64> = lo.clone();
        loop {
            let nv = DVector::from_fn(g, |i, _| n[i] as f64);
            let shifted = x + &nv;
            let psi = self.bump.eval(&shifted);
            if psi != 0.0 {
                let phase = t_dec + xi_dec.dot(&nv) + nv.dot(&(&self.q * &nv)) / 2.0;
                acc += self.phi.eval(phase) * psi;
            }
            // advance box odometer
            let mut axis = g;
            let mut done = true;
            while axis > 0 {
                axis -= 1;
                if n[axis] < hi[axis] {
                    n[axis] += 1;
                    for k in axis + 1..g {
                        n[k] = lo[k];
                    }
                    done = false;
                    break;
                }
            }
            if done {
                return acc;
            }
        }
    }
}

/// Tensor-product Gauss–Legendre quadrature layout over a cube.
#[derive(Debug, Clone, Copy)]
pub struct QuadSpec {
    pub panels_per_axis: usize,
    pub points_per_panel: usize,
}

impl QuadSpec {
    /// Builds a spec meeting a nodes-per-unit-length target.
    pub fn per_unit(len: f64, nodes_per_unit: usize) -> Self {
        let points = 10usize;
        let total = (len * nodes_per_unit as f64).ceil() as usize;
        Self {
            panels_per_axis: total.div_ceil(points).max(1),
            points_per_panel: points,
        }
    }

    fn nodes_per_unit(&self, len: f64) -> f64 {
        (self.panels_per_axis * self.points_per_panel) as f64 / len
    }

    fn halved(&self) -> Self {
        Self {
            panels_per_axis: (self.panels_per_axis / 2).max(1),
            points_per_panel: self.points_per_panel,
        }
    }
}

/// Birkhoff integral of the observable over the cube `[lo, hi]^d` of flow
/// parameters, with an a-posteriori error indicator (difference against the
/// half-resolution grid).
pub fn birkhoff(
    frame: &IsotropicFrame,
    obs: &Observable,
    m: &NilPoint,
    lo: f64,
    hi: f64,
    quad: QuadSpec,
    tol: Option<f64>,
) -> Result<(Complex64, f64)> {
    if hi <= lo {
        return Err(SiegelError::Domain("empty integration cube".into()));
    }
    if quad.nodes_per_unit(hi - lo) < 8.0 {
        return Err(SiegelError::Domain(
            "need at least 8 quadrature nodes per unit length per axis".into(),
        ));
    }
    let value = birkhoff_eval(frame, obs, m, lo, hi, quad)?;
    let coarse = birkhoff_eval(frame, obs, m, lo, hi, quad.halved())?;
    let indicator = (value - coarse).norm();
    if let Some(tol) = tol {
        if indicator > tol {
            return Err(SiegelError::Accuracy(format!(
                "quadrature indicator {indicator:.3e} exceeds requested tolerance {tol:.3e}"
            )));
        }
    }
    Ok((value, indicator))
}

fn birkhoff_eval(
    frame: &IsotropicFrame,
    obs: &Observable,
    m: &NilPoint,
    lo: f64,
    hi: f64,
    quad: QuadSpec,
) -> Result<Complex64> {
    let d = frame.d;
    let (gl_nodes, gl_weights) = gauss_legendre(quad.points_per_panel);
    let panels = quad.panels_per_axis;
    let width = (hi - lo) / panels as f64;
    // 1-D node/weight list
    let mut nodes = Vec::with_capacity(panels * quad.points_per_panel);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        for (x, w) in gl_nodes.iter().zip(&gl_weights) {
            nodes.push((a + width * (x + 1.0) / 2.0, w * width / 2.0));
        }
    }
    // parallelize over the outermost axis in fixed tiles
    let outer: Vec<usize> = (0..nodes.len()).collect();
    let parts: Vec<Result<Complex64>> = threads::par_map(outer, |i0| {
        let mut acc = KahanComplex::new();
        let mut idx = vec![0usize; d];
        idx[0] = i0;
        let mut xs = vec![0.0f64; d];
        loop {
            let mut w = 1.0;
            for (k, &ni) in idx.iter().enumerate() {
                xs[k] = nodes[ni].0;
                w *= nodes[ni].1;
            }
            let pt = flow(frame, m, &xs)?;
            acc.add(obs.eval(&pt) * w);
            // advance inner axes
            let mut axis = d;
            let mut done = true;
            while axis > 1 {
                axis -= 1;
                if idx[axis] + 1 < nodes.len() {
                    idx[axis] += 1;
                    for k in axis + 1..d {
                        idx[k] = 0;
                    }
                    done = false;
                    break;
                }
                idx[axis] = 0;
            }
            if done {
                return Ok(acc.value());
            }
        }
    });
    let mut vals = Vec::with_capacity(parts.len());
    for p in parts {
        vals.push(p?);
    }
    Ok(tree_sum_complex(&vals))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` by Newton iteration.
pub fn gauss_legendre(p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0f64; p];
    let mut weights = vec![0.0f64; p];
    for i in 0..p.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (p as f64 + 0.5)).cos();
        for _ in 0..100 {
            // P_p(x) and P_p'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=p {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            let dp = p as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=p {
            let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = pk;
        }
        let dp = p as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[p - 1 - i] = x;
        weights[i] = w;
        weights[p - 1 - i] = w;
    }
    if p % 2 == 1 {
        nodes[p / 2] = 0.0;
    }
    (nodes, weights)
}

mod serde_io;
